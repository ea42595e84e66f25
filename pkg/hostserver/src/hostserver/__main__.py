import argparse
import sys

from .server import serve_stdio, serve_tcp


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="hostserver")
    parser.add_argument("--tcp", type=int, default=None, metavar="PORT",
                        help="listen on a TCP port instead of stdio")
    args = parser.parse_args(argv)
    if args.tcp is not None:
        serve_tcp(args.tcp)
    else:
        serve_stdio()
    return 0


if __name__ == "__main__":
    sys.exit(main())
