"""bosonctx - reproduce and audit contextuality claims about bosonic bunching."""

__version__ = "0.3.0"

from bosonctx.errors import BosonCtxError  # noqa: E402,F401
