"""
Exo-Mix - Application Entry Point
"""
from app.commands import cli


if __name__ == '__main__':
    cli(prog_name='exomix')
