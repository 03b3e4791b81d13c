"""
Main command-line entry point for the short-text classifier
"""
import sys

import click
from dotenv import load_dotenv

# Load environment variables before the package reads them
load_dotenv()

from shorttext.commands import cli, register_commands  # noqa: E402
from shorttext.utils.decorators import USAGE_EXIT  # noqa: E402

# Register custom CLI commands
register_commands(cli)


def main(argv=None):
    """Run one command and return its exit code: 0 ok, 1 usage error, 2 data or model error"""
    try:
        result = cli.main(args=argv, prog_name="shorttext", standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return USAGE_EXIT
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return USAGE_EXIT
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
