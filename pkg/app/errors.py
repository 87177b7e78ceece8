from typing import Any, Dict, Optional

PARSE_ERROR = "PARSE_ERROR"
INVALID_WORLD = "INVALID_WORLD"
INVALID_DATASET = "INVALID_DATASET"
DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
INDEX_ERROR = "INDEX_ERROR"
EMPTY_DATASET = "EMPTY_DATASET"
GRID_TOO_LARGE = "GRID_TOO_LARGE"
INVALID_DELTA = "INVALID_DELTA"
INVALID_ARGUMENT = "INVALID_ARGUMENT"
CONFIG_ERROR = "CONFIG_ERROR"
NO_COORDS = "NO_COORDS"
IO_ERROR = "IO_ERROR"
MISSING_HYPOTHESES = "MISSING_HYPOTHESES"


class LabError(Exception):
    """
    Every failure the lab reports carries a machine-readable code.
    `details` holds structured context (e.g. the validation report for INVALID_WORLD).
    """

    def __init__(self, code: str, message: str, details: Optional[Any] = None):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.details = details

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"error": self.code, "message": self.message}
        if self.details is not None:
            out["details"] = self.details
        return out
