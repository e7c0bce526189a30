"""Exception hierarchy shared by every slidekit module."""

from __future__ import annotations


class SlidekitError(Exception):
    """Base class for all slidekit errors."""


# --- SVG document model ---


class MalformedSvg(SlidekitError):
    """Input markup is unbalanced or otherwise unparseable."""


class UnsupportedElement(SlidekitError):
    """Element outside the slide SVG dialect."""

    def __init__(self, element: str, detail: str = ""):
        self.element = element
        msg = f"unsupported element <{element}>"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MissingCanvas(SlidekitError):
    """Root svg element lacks usable width/height attributes."""


class InvariantViolation(SlidekitError):
    """A document fails one or more type invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invariant violation")


# --- context building / training export ---


class InvalidDetection(SlidekitError):
    """Detection box unusable (outside canvas with clamping disabled)."""


class MissingPrior(SlidekitError):
    """No prior prediction available for a refinement-half sample."""


# --- derender engine ---


class BackendError(SlidekitError):
    """Backend transport or HTTP failure after retries."""


class UnrepairableResponse(SlidekitError):
    """No parseable SVG could be recovered from a backend response."""

    def __init__(self, message: str, raw_response: str = ""):
        self.raw_response = raw_response
        super().__init__(message)


class InvalidDoc(SlidekitError):
    """Backend response parsed but the document fails validation."""

    def __init__(self, violations, raw_response: str = ""):
        self.violations = list(violations)
        self.raw_response = raw_response
        super().__init__("; ".join(str(v) for v in self.violations))


# --- raster operations / post-processing ---


class ShapeMismatch(SlidekitError):
    """Two rasters that must share dimensions do not."""


class EmptyCrop(SlidekitError):
    """Requested crop rectangle has zero area after clamping."""


class MissingAsset(SlidekitError):
    """An href in the document has no raster to composite."""


# --- metrics / ranking ---


class UnknownMethod(SlidekitError):
    """Method name not registered in the rating table."""


class DegenerateInput(SlidekitError):
    """Metric input too small to be meaningful (e.g. fewer than 2 items)."""


class DuplicateMethod(SlidekitError):
    """A ranking mentions the same method twice."""


# --- dataset pipeline ---


class ZeroCanvas(SlidekitError):
    """Canvas dimensions are zero; coordinates cannot be normalized."""


class RenderError(SlidekitError):
    """External renderer command failed."""


# --- evaluation service ---


class MissingOutput(SlidekitError):
    """A method lacks a rendering for some corpus sample."""


class DuplicateSubmission(SlidekitError):
    """A (rater, sample) pair was already ranked."""


class InvalidPermutation(SlidekitError):
    """Submitted ranking is not a full permutation of the blind labels."""
