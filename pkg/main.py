#!/usr/bin/env python
"""
Twisting Squeezing - Main Entry Point

Runs the command-line interface for twisting-tensor spin-squeezing simulations.
"""
import sys
from dotenv import load_dotenv
from twisting_squeezing.app import build_parser, configure_logging, execute


def main():
    """Main entry point for the application."""
    # Load environment variables from .env file
    load_dotenv()

    args = build_parser().parse_args()
    configure_logging(debug=args.debug)
    if args.debug:
        print("Running in debug mode")

    sys.exit(execute(args))


if __name__ == "__main__":
    main()
