#!/usr/bin/env python
"""Entry point for the voting-bloc entropy toolkit commands.

    python manage.py compute --votes votes.csv --balances balances.csv --proposals proposals.csv
    python manage.py verify sybil --trials 500 --seed 7
"""
import os
import sys


def main():
    """Run a toolkit command."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'vbe_toolkit.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
