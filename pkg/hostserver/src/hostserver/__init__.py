"""Out-of-process host runtime: newline-delimited JSON over stdio or TCP."""

from .server import PROTOCOL_VERSION, HostServer, serve, serve_stdio, serve_tcp
from .wire import Handle, WireError, decode, encode

__version__ = "0.1.0"

__all__ = [
    "Handle",
    "HostServer",
    "PROTOCOL_VERSION",
    "WireError",
    "decode",
    "encode",
    "serve",
    "serve_stdio",
    "serve_tcp",
]
