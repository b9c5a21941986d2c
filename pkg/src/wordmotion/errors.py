"""Exception types shared across the package."""

from __future__ import annotations


class WordMotionError(Exception):
    """Base class for all package errors."""


# --- ingest ---------------------------------------------------------------


class MissingColumn(WordMotionError):
    def __init__(self, name: str):
        super().__init__(f"required column missing: {name!r}")
        self.name = name


class NonMonotonicFrames(WordMotionError):
    def __init__(self, index: int, detail: str = "frame index not strictly increasing"):
        super().__init__(f"{detail} at row {index}")
        self.index = index


class EmptyFile(WordMotionError):
    pass


class NonFiniteCoordinate(WordMotionError):
    pass


class MalformedRecord(WordMotionError):
    def __init__(self, line_no: int, text: str):
        super().__init__(f"malformed record at line {line_no}: {text!r}")
        self.line_no = line_no
        self.text = text


class NegativeDuration(WordMotionError):
    pass


class UnknownScenario(WordMotionError):
    def __init__(self, scenario: str):
        super().__init__(f"unknown scenario: {scenario!r}")
        self.scenario = scenario


class MissingFile(WordMotionError):
    pass


# --- features -------------------------------------------------------------


class SpanOutOfRange(WordMotionError):
    pass


class EmptyLexicon(WordMotionError):
    pass


# --- classifier -----------------------------------------------------------


class SingleClassData(WordMotionError):
    pass


class NonFiniteInput(WordMotionError):
    pass


class EmptyBank(WordMotionError):
    pass


class VersionMismatch(WordMotionError):
    pass


class CorruptModel(WordMotionError):
    pass


# --- scoring --------------------------------------------------------------


class EmptySequence(WordMotionError):
    pass


class ModeMismatch(WordMotionError):
    pass


# --- evaluation -----------------------------------------------------------


class EmptyClass(WordMotionError):
    pass


class InsufficientVideos(WordMotionError):
    pass


# --- synth ----------------------------------------------------------------


class LengthMismatch(WordMotionError):
    pass
