"""In-process protocol targets with planted bugs, looked up by name."""

from .base import (
    BUG_CLASSES, CRASH, EXPLICIT_STATE, IMPLICIT_STATE, OK, REJECT, STATELESS,
    Outcome, PlantedBug, Target, TargetCrash, frame, split_frames,
)
from .http2 import MiniHttp2
from .leaky import LeakyParser
from .rtsp import MiniRtsp
from .stateless import StatelessParser

REGISTRY = {
    "mini_http2": MiniHttp2,
    "mini_rtsp": MiniRtsp,
    "leaky_parser": LeakyParser,
    "stateless_parser": StatelessParser,
}


class UnknownTarget(KeyError):
    pass


def get_target(name: str) -> Target:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise UnknownTarget(name) from None


def mini_http2() -> MiniHttp2:
    return MiniHttp2()


def mini_rtsp() -> MiniRtsp:
    return MiniRtsp()


def leaky_parser() -> LeakyParser:
    return LeakyParser()


def stateless_parser() -> StatelessParser:
    return StatelessParser()


__all__ = [
    "BUG_CLASSES", "CRASH", "EXPLICIT_STATE", "IMPLICIT_STATE", "OK", "REJECT",
    "STATELESS", "Outcome", "PlantedBug", "REGISTRY", "Target", "TargetCrash",
    "UnknownTarget", "frame", "get_target", "split_frames", "mini_http2",
    "mini_rtsp", "leaky_parser", "stateless_parser",
]
