"""Exception hierarchy. Each category maps to a distinct CLI exit code."""


class AuditError(Exception):
    exit_code = 1


class ParseError(AuditError):
    exit_code = 3


class ParameterError(AuditError, ValueError):
    exit_code = 4


class IntegrityError(AuditError):
    exit_code = 5


class IncompleteLabelsError(AuditError):
    exit_code = 6

    def __init__(self, missing):
        self.missing = list(missing)
        preview = ", ".join(self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
        super().__init__(f"{len(self.missing)} selected videos have no label: {preview}{more}")


class NonConvergenceError(AuditError):
    exit_code = 7
