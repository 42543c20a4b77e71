# core/exceptions.py
from typing import Optional


class KnotGeoError(Exception):
    """Base error. `exit_code` is what the CLI returns, `detail` what it prints."""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


# ========================================
# Exit 1: usage / input errors
# ========================================
class UsageError(KnotGeoError):
    exit_code = 1


class ExpressionSyntaxError(UsageError):
    def __init__(self, detail: str, position: int):
        super().__init__(f"{detail} at position {position}")
        self.position = position


class InvalidKnotError(UsageError):
    pass


class UnknownKnotError(UsageError):
    pass


class BoxTooLargeError(UsageError):
    pass


class ExtrapolationError(UsageError):
    pass


# ========================================
# Exit 2: registry / consistency errors
# ========================================
class RegistryError(KnotGeoError):
    exit_code = 2


class ConsistencyError(KnotGeoError):
    exit_code = 2


# ========================================
# Exit 3: verification diff
# ========================================
class VerificationFailed(KnotGeoError):
    exit_code = 3
