"""Exception hierarchy. Certificate failures are data, not exceptions."""


class FasreconError(Exception):
    pass


class ParseError(FasreconError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


class MetricError(FasreconError):
    """Ingested data violates the metric axioms; ``report`` holds the violations."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class NotUltrametric(FasreconError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"sample is not ultrametric; witness {report.witness}")


class FasError(FasreconError):
    def __init__(self, message, level=None):
        self.level = level
        super().__init__(message)


class ElementError(FasreconError):
    pass


class EmptySubset(ElementError):
    pass


class NotInLevel(ElementError):
    pass


class DiameterTooLarge(ElementError):
    pass


class LevelMismatch(ElementError):
    pass


class CapExceeded(FasreconError):
    def __init__(self, cap, partial_count):
        self.cap = cap
        self.partial_count = partial_count
        super().__init__(f"enumeration exceeded cap {cap} (counted {partial_count} before aborting)")


class InsufficientDepth(FasreconError):
    def __init__(self, required, available):
        self.required = required
        self.available = available
        super().__init__(f"need {required} levels, only {available} available")


class IncoherentThread(FasreconError):
    def __init__(self, level, message=None):
        self.level = level
        super().__init__(message or f"thread is not coherent at level {level}; increase M")
