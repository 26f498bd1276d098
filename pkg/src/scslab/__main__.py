from dotenv import load_dotenv
load_dotenv()

from .main import cli

cli(prog_name='scslab')
