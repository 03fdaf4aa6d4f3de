"""Exception types shared across the package.

Every error the codec raises deliberately derives from CodecError and
carries a short machine-parseable code so the CLI and the HTTP service
can report failures uniformly.
"""


class CodecError(Exception):
    code = "E_INTERNAL"


class InvalidArgument(CodecError, ValueError):
    """A caller violated an operation's precondition."""

    code = "E_ARG"


class InputError(CodecError, ValueError):
    """User-supplied input files or manifests are inconsistent."""

    code = "E_INPUT"


class FormatError(CodecError, ValueError):
    """Malformed bitstream, payload, or condition file.

    ``offset`` is the byte position at which parsing failed, when known.
    """

    code = "E_FORMAT"

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset

    def __str__(self) -> str:
        base = super().__str__()
        if self.offset is not None:
            return f"{base} (at byte {self.offset})"
        return base
