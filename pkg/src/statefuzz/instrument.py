"""Source-to-source injection of ``__stt_update`` calls.

Every statement-level assignment of a named constant to a manifest variable
gets a call on its own line right above it::

    __stt_update("stream->state", H2O_HTTP2_STREAM_STATE_RECV_BODY);
    stream->state = H2O_HTTP2_STREAM_STATE_RECV_BODY;

Sites that cannot be rewritten by inserting a whole line (the assignment
spans lines, sits behind an ``if``/``case``/``for`` on the same line, or is a
ternary) are skipped and reported as conflicts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .svscan import (
    VariableManifest, _LHS, _is_declaration, find_assignments, normalize_lhs, strip_comments,
)

UPDATE_FN = "__stt_update"
_CALL_LINE = re.compile(r'^[ \t]*__stt_update\("[^"\n]*", [A-Za-z_]\w*\);(\r\n|\n|\r)?$')
_TERNARY = re.compile(r"(?<![\w.>\]])(?P<lhs>" + _LHS + r")\s*(?<![=!<>+\-*/%&|^])=(?!=)"
                      r"(?P<rhs>[^;{}]*\?[^;{}]*);")
_ANY_ASSIGN = re.compile(r"(?<![\w.>\]])(?P<lhs>" + _LHS + r")\s*(?<![=!<>+\-*/%&|^])=(?!=)"
                         r"\s*(?P<rhs>[^;{}]*?)\s*;")

RUNTIME_HEADER = """\
#ifndef STATEFUZZ_STT_RUNTIME_H
#define STATEFUZZ_STT_RUNTIME_H
#ifdef __cplusplus
extern "C" {
#endif

/* Called before every assignment of a named constant to a state variable. */
void __stt_update(const char *name, int value);

#ifdef __cplusplus
}
#endif
#endif /* STATEFUZZ_STT_RUNTIME_H */
"""


@dataclass(frozen=True)
class InjectionSite:
    file: str
    line: int
    variable: str
    constant: str
    constant_value: int


@dataclass(frozen=True)
class InjectionConflict:
    file: str
    line: int
    variable: str
    reason: str

    def __str__(self) -> str:
        return f"CONFLICT {self.file}:{self.line} {self.variable}"


def emit_runtime_header() -> str:
    return RUNTIME_HEADER


def call_line(indent: str, variable: str, constant: str, newline: str = "\n") -> str:
    return f'{indent}{UPDATE_FN}("{variable}", {constant});{newline}'


def _targets(manifest: VariableManifest) -> Dict[str, Dict[str, int]]:
    out = {}
    for entry in manifest.entries:
        if entry.blocked:
            continue
        enum = manifest.enum(entry.enum_type)
        if enum is None:
            continue
        out.setdefault(entry.name, {}).update(enum.constants)
    return out


def _unbraced_body(code: str, line_start: int) -> bool:
    """True if the statement starting at ``line_start`` is the sole body of a
    brace-less ``if``/``else``/loop, where an inserted line would escape it."""
    prev = code[:line_start].rstrip()
    if prev.endswith(")"):
        return True
    return re.search(r"\b(else|do)$", prev) is not None


def inject(source_text: str, manifest: VariableManifest, path: str = "<text>"
           ) -> Tuple[str, List[InjectionSite], List[InjectionConflict]]:
    """Instrument ``source_text``.

    Returns the new text, the instrumented sites (including ones that were
    already instrumented by an earlier pass) and the skipped conflicts.
    """
    targets = _targets(manifest)
    if not targets:
        return source_text, [], []
    code = strip_comments(source_text)
    lines = source_text.splitlines(keepends=True)
    starts = [0]
    for ln in lines:
        starts.append(starts[-1] + len(ln))

    def line_index(offset: int) -> int:
        lo, hi = 0, len(lines) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo

    constants = {c for consts in targets.values() for c in consts}
    sites: List[InjectionSite] = []
    conflicts: List[InjectionConflict] = []
    inserts: Dict[int, List[str]] = {}
    seen = set()

    for a in find_assignments(code, path, constants):
        consts = targets.get(a.lhs)
        if consts is None or a.constant not in consts:
            continue
        li = line_index(a.offset)
        before = code[starts[li]:a.offset]
        reason = None
        if code[a.end - 1] == ")" or re.search(r"\bfor\s*\([^)]*$", before):
            reason = "for-header or parenthesised assignment"
        elif line_index(a.end - 1) != li:
            reason = "assignment spans lines"
        elif before.strip():
            reason = "assignment does not start the line"
        elif _unbraced_body(code, starts[li]):
            reason = "body of an unbraced if/else/loop"
        elif (li, a.lhs) in seen:
            reason = "second assignment of the variable on one line"
        if reason is not None:
            conflicts.append(InjectionConflict(path, li + 1, a.lhs, reason))
            continue
        seen.add((li, a.lhs))
        sites.append(InjectionSite(path, li + 1, a.lhs, a.constant, consts[a.constant]))
        indent = re.match(r"[ \t]*", lines[li]).group(0)
        newline = re.search(r"(\r\n|\n|\r)?$", lines[li]).group(0) or "\n"
        call = call_line(indent, a.lhs, a.constant, newline)
        # already instrumented by an earlier pass
        k = li - 1
        while k >= 0 and _CALL_LINE.match(lines[k]) and lines[k] != call:
            k -= 1
        if k >= 0 and lines[k] == call:
            continue
        inserts.setdefault(li, []).append(call)

    for m in _TERNARY.finditer(code):
        lhs = normalize_lhs(m.group("lhs"))
        consts = targets.get(lhs)
        if consts and set(re.findall(r"[A-Za-z_]\w*", m.group("rhs"))) & set(consts):
            conflicts.append(InjectionConflict(path, line_index(m.start()) + 1, lhs, "ternary"))

    if not inserts:
        return source_text, sites, sorted(conflicts, key=lambda c: c.line)
    out = []
    for i, ln in enumerate(lines):
        out.extend(inserts.get(i, ()))
        out.append(ln)
    return "".join(out), sites, sorted(conflicts, key=lambda c: c.line)


def dynamic_assignments(source_text: str, manifest: VariableManifest, path: str = "<text>"
                        ) -> List[InjectionConflict]:
    """Assignments to manifest variables whose right-hand side is not a named
    constant (``v = f()``, ``v = other``).  These are never instrumented; they
    are returned so callers can flag them."""
    targets = _targets(manifest)
    code = strip_comments(source_text)
    out = []
    for m in _ANY_ASSIGN.finditer(code):
        lhs = normalize_lhs(m.group("lhs"))
        consts = targets.get(lhs)
        rhs = m.group("rhs")
        if consts is None or rhs in consts or "?" in rhs or _is_declaration(code, m.start()):
            continue
        line = code.count("\n", 0, m.start()) + 1
        out.append(InjectionConflict(path, line, lhs, f"non-constant assignment {rhs!r}"))
    return out


def strip(instrumented_text: str) -> str:
    """Drop every injected call line."""
    lines = instrumented_text.splitlines(keepends=True)
    return "".join(ln for ln in lines if not _CALL_LINE.match(ln))
