"""Find candidate state variables in C sources by pattern matching.

No parser is involved: comments and string literals are blanked out, enum
definitions are pulled out with a regular expression, and any variable of
enum type that is assigned one of its named constants somewhere becomes a
candidate.  Struct members are matched through their declaration when the
struct is in the scanned sources, otherwise through the constant on the
right-hand side of the assignment.
"""

from __future__ import annotations

import ast
import hashlib
import operator
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

MANIFEST_HEADER = "# statefuzz variable manifest"


@dataclass(frozen=True, order=True)
class SourceLocation:
    path: str
    line: int

    def __str__(self) -> str:
        return f"{self.path}:{self.line}"


@dataclass
class EnumDefinition:
    type_name: str
    constants: List[Tuple[str, int]]
    source_location: SourceLocation
    aliases: Tuple[str, ...] = ()

    def value_of(self, name: str) -> Optional[int]:
        for const, value in self.constants:
            if const == name:
                return value
        return None

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(c for c, _ in self.constants)


@dataclass
class StateVariable:
    name: str
    enum_type: str
    assignment_sites: List[SourceLocation] = field(default_factory=list)
    blocked: bool = False


@dataclass
class VariableManifest:
    entries: List[StateVariable]
    source_fingerprint: str
    enums: List[EnumDefinition] = field(default_factory=list)

    def get(self, name: str) -> Optional[StateVariable]:
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None

    def enum(self, type_name: str) -> Optional[EnumDefinition]:
        for enum in self.enums:
            if enum.type_name == type_name or type_name in enum.aliases:
                return enum
        return None

    def dumps(self) -> str:
        lines = [MANIFEST_HEADER, f"# fingerprint\t{self.source_fingerprint}"]
        used = sorted({e.enum_type for e in self.entries})
        for type_name in used:
            enum = self.enum(type_name)
            if enum is None:
                continue
            consts = ",".join(f"{n}={v}" for n, v in enum.constants)
            lines.append(f"# enum\t{type_name}\t{consts}")
        for e in self.entries:
            lines.append(f"{e.name}\t{e.enum_type}\t{int(e.blocked)}\t{len(e.assignment_sites)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "VariableManifest":
        entries, enums, fingerprint = [], [], ""
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.rstrip("\r")
            if not line.strip():
                continue
            if line.startswith("#"):
                parts = line.split("\t")
                if parts[0] == "# fingerprint" and len(parts) == 2:
                    fingerprint = parts[1]
                elif parts[0] == "# enum" and len(parts) == 3:
                    consts = []
                    for item in filter(None, parts[2].split(",")):
                        name, value = item.split("=")
                        consts.append((name, int(value)))
                    enums.append(EnumDefinition(parts[1], consts, SourceLocation("<manifest>", lineno)))
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"manifest line {lineno}: expected 4 tab-separated fields")
            name, enum_type, blocked, count = parts
            if blocked not in ("0", "1"):
                raise ValueError(f"manifest line {lineno}: blocked must be 0 or 1")
            sites = [SourceLocation("<manifest>", lineno)] * int(count)
            entries.append(StateVariable(name, enum_type, sites, blocked == "1"))
        return cls(entries, fingerprint, enums)


# -- lexical clean-up ---------------------------------------------------------

def strip_comments(text: str) -> str:
    """Blank out comments and string literal contents, keeping offsets and
    newlines intact.  Character literals are kept (enum values use them)."""
    out = list(text)
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if c == "/" and nxt == "/":
            j = text.find("\n", i)
            j = n if j < 0 else j
            for k in range(i, j):
                out[k] = " "
            i = j
        elif c == "/" and nxt == "*":
            j = text.find("*/", i + 2)
            j = n if j < 0 else j + 2
            for k in range(i, j):
                if out[k] != "\n":
                    out[k] = " "
            i = j
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"' and text[j] != "\n":
                if text[j] == "\\":
                    out[j] = " "
                    j += 1
                    if j < n and text[j] != "\n":
                        out[j] = " "
                    j += 1
                    continue
                out[j] = " "
                j += 1
            i = j + 1
        elif c == "'":
            j = i + 1
            while j < n and text[j] != "'" and text[j] != "\n":
                j += 2 if text[j] == "\\" else 1
            i = j + 1
        else:
            i += 1
    return "".join(out)


def _line_of(text: str, offset: int) -> int:
    return text.count("\n", 0, offset) + 1


# -- enum definitions -----------------------------------------------------------

_ENUM_RE = re.compile(
    r"\b(?P<typedef>typedef\s+)?enum\b(?:\s+(?:class|struct)\b)?"
    r"(?:\s+(?P<tag>[A-Za-z_]\w*))?"
    r"(?:\s*:\s*[A-Za-z_][\w\s]*?)?"
    r"\s*\{(?P<body>[^{}]*)\}"
    r"(?P<trail>[^;{}]*);"
)
_CONST_RE = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:=\s*(.+?))?\s*$", re.S)
_INT_SUFFIX = re.compile(r"\b(0[xX][0-9a-fA-F]+|\d+)[uUlL]+\b")
_CHAR_LIT = re.compile(r"'(\\.|[^'\\])'")
_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7, "b": 8,
            "f": 12, "v": 11}

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.FloorDiv: operator.floordiv, ast.Mod: operator.mod, ast.LShift: operator.lshift,
    ast.RShift: operator.rshift, ast.BitOr: operator.or_, ast.BitAnd: operator.and_,
    ast.BitXor: operator.xor,
}
_UNOPS = {ast.USub: operator.neg, ast.UAdd: operator.pos, ast.Invert: operator.invert}


class _BadExpr(ValueError):
    pass


def _char_value(m: re.Match) -> str:
    body = m.group(1)
    if body.startswith("\\"):
        if body[1] in _ESCAPES:
            return str(_ESCAPES[body[1]])
        raise _BadExpr(body)
    return str(ord(body))


def eval_const_expr(expr: str, known: Dict[str, int]) -> int:
    """Evaluate a C integer constant expression made of literals, earlier
    constants and arithmetic/bitwise operators."""
    src = _CHAR_LIT.sub(_char_value, expr)
    src = _INT_SUFFIX.sub(lambda m: m.group(1), src)
    src = re.sub(r"\b0([0-7]+)\b", r"0o\1", src)
    src = src.replace("/", "//")
    try:
        tree = ast.parse(src.strip(), mode="eval")
    except SyntaxError as exc:
        raise _BadExpr(expr) from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in known:
                return known[node.id]
            raise _BadExpr(node.id)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise _BadExpr(expr)

    return ev(tree)


def _split_top(body: str) -> List[str]:
    parts, depth, cur = [], 0, []
    for ch in body:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _anon_name(path: str, line: int) -> str:
    return "anon:" + re.sub(r"\s", "_", path) + f":{line}"


def scan_enums(source_text: str, path: str = "<text>",
               diagnostics: Optional[List[str]] = None) -> List[EnumDefinition]:
    """Every ``enum`` definition in ``source_text`` with resolved values."""
    diags = diagnostics if diagnostics is not None else []
    text = strip_comments(source_text)
    found = []
    known: Dict[str, int] = {}
    for m in _ENUM_RE.finditer(text):
        line = _line_of(text, m.start())
        where = f"{path}:{line}"
        consts: List[Tuple[str, int]] = []
        local = dict(known)
        counter = 0
        ok = True
        for item in _split_top(m.group("body")):
            if not item.strip():
                continue
            cm = _CONST_RE.match(item)
            if cm is None:
                diags.append(f"{where}: skipped enum, cannot read constant {item.strip()!r}")
                ok = False
                break
            name, expr = cm.group(1), cm.group(2)
            if expr is not None:
                try:
                    counter = eval_const_expr(expr, local)
                except _BadExpr:
                    diags.append(f"{where}: skipped enum, cannot evaluate {name} = {expr.strip()}")
                    ok = False
                    break
            if any(name == c for c, _ in consts):
                diags.append(f"{where}: skipped enum, duplicate constant {name}")
                ok = False
                break
            consts.append((name, counter))
            local[name] = counter
            counter += 1
        if not ok:
            continue
        tag = m.group("tag")
        trail = m.group("trail").strip()
        aliases = []
        if m.group("typedef") and trail:
            aliases = [a.strip().lstrip("*").strip() for a in trail.split(",")]
            aliases = [a for a in aliases if re.fullmatch(r"[A-Za-z_]\w*", a)]
        type_name = tag or (aliases[0] if aliases else _anon_name(path, line))
        all_names = tuple(dict.fromkeys([n for n in [tag, *aliases] if n]))
        found.append(EnumDefinition(type_name, consts, SourceLocation(path, line), all_names))
        known.update(local)
    return found


# -- variables --------------------------------------------------------------------

_LHS = r"[A-Za-z_]\w*(?:\s*(?:->|\.)\s*[A-Za-z_]\w*|\s*\[[^\]\n;]*\])*"
_ASSIGN_RE = re.compile(
    r"(?<![\w.>\]])(?P<lhs>" + _LHS + r")\s*(?<![=!<>+\-*/%&|^])=(?!=)\s*"
    r"(?P<rhs>[A-Za-z_]\w*)\s*(?P<end>[;,)])"
)
_STRUCT_RE = re.compile(r"\b(?:struct|union)\b\s*(?:[A-Za-z_]\w*)?\s*\{")
_KEYWORDS = {"return", "else", "do", "case", "goto", "sizeof"}


@dataclass(frozen=True)
class AssignmentSite:
    lhs: str
    constant: str
    location: SourceLocation
    offset: int
    end: int


def normalize_lhs(lhs: str) -> str:
    return re.sub(r"\s+", "", lhs)


def _struct_spans(text: str) -> List[Tuple[int, int]]:
    spans = []
    for m in _STRUCT_RE.finditer(text):
        depth, i = 0, m.end() - 1
        while i < len(text):
            if text[i] == "{":
                depth += 1
            elif text[i] == "}":
                depth -= 1
                if depth == 0:
                    break
            i += 1
        spans.append((m.end(), i))
    return spans


def _is_declaration(text: str, offset: int) -> bool:
    """True if the identifier at ``offset`` is being declared (``T name = ..``)."""
    j = offset - 1
    while j >= 0 and text[j] in " \t\r\n":
        j -= 1
    if j < 0:
        return False
    if text[j] == "*":
        k = j
        while k >= 0 and text[k] in "* \t\r\n":
            k -= 1
        return k >= 0 and (text[k].isalnum() or text[k] == "_")
    if text[j].isalnum() or text[j] == "_":
        k = j
        while k >= 0 and (text[k].isalnum() or text[k] == "_"):
            k -= 1
        word = text[k + 1:j + 1]
        return word not in _KEYWORDS
    return False


def find_assignments(text: str, path: str, constants: Set[str]) -> List[AssignmentSite]:
    """Assignments of a named constant to an lvalue; declarations excluded.

    ``text`` must already have its comments stripped.
    """
    sites = []
    for m in _ASSIGN_RE.finditer(text):
        rhs = m.group("rhs")
        if rhs not in constants:
            continue
        if _is_declaration(text, m.start("lhs")):
            continue
        loc = SourceLocation(path, _line_of(text, m.start("lhs")))
        sites.append(AssignmentSite(normalize_lhs(m.group("lhs")), rhs, loc,
                                    m.start("lhs"), m.end()))
    return sites


def _declarations(text: str, path: str, type_names: Dict[str, str]):
    """Yield ``(name, enum_type, is_member)`` for enum-typed declarations."""
    spans = _struct_spans(text)
    words = "|".join(sorted((re.escape(t) for t in type_names), key=len, reverse=True))
    decl_re = None if not words else re.compile(
        r"(?:\benum\s+(?:class\s+)?)?\b(?P<type>" + words + r")\b"
        r"(?P<decls>(?:\s*(?:const\s+)?\**\s*[A-Za-z_]\w*\s*(?:\[[^\]]*\])?\s*"
        r"(?:=\s*[^,;(){}]+)?\s*,)*\s*(?:const\s+)?\**\s*[A-Za-z_]\w*\s*(?:\[[^\]]*\])?)"
        r"\s*(?=[;=)\[])"
    )
    for m in (decl_re.finditer(text) if decl_re else ()):
        enum_type = type_names[m.group("type")]
        member = any(a <= m.start() < b for a, b in spans)
        for part in m.group("decls").split(","):
            part = part.split("=")[0]
            nm = re.search(r"([A-Za-z_]\w*)\s*(?:\[[^\]]*\])?\s*$", part.strip())
            if nm and nm.group(1) not in ("const",):
                yield nm.group(1), enum_type, member
    # `enum X { ... } var;` declares variables in the trailer
    for m in _ENUM_RE.finditer(text):
        if m.group("typedef"):
            continue
        tag = m.group("tag")
        enum_type = type_names.get(tag) if tag else _anon_name(path, _line_of(text, m.start()))
        if enum_type is None:
            continue
        member = any(a <= m.start() < b for a, b in spans)
        for part in m.group("trail").split(","):
            nm = re.search(r"([A-Za-z_]\w*)\s*(?:\[[^\]]*\])?$", part.split("=")[0].strip())
            if nm:
                yield nm.group(1), enum_type, member


def source_fingerprint(sources: Sequence[Tuple[str, str]]) -> str:
    h = hashlib.sha256()
    for path, text in sorted(sources):
        h.update(path.encode("utf-8") + b"\0" + text.encode("utf-8") + b"\0")
    return "sha256:" + h.hexdigest()


def find_state_variables(sources: Sequence[Tuple[str, str]],
                         enums: Sequence[EnumDefinition],
                         blocklist: Iterable[str] = (),
                         diagnostics: Optional[List[str]] = None) -> VariableManifest:
    """Enum-typed variables assigned a named constant at least once."""
    diags = diagnostics if diagnostics is not None else []
    blocked = set(blocklist)
    type_names: Dict[str, str] = {}
    const_owner: Dict[str, List[EnumDefinition]] = {}
    by_type: Dict[str, EnumDefinition] = {}
    for enum in enums:
        by_type[enum.type_name] = enum
        for alias in (enum.type_name, *enum.aliases):
            if not alias.startswith("anon:"):
                type_names[alias] = enum.type_name
        for const, _ in enum.constants:
            const_owner.setdefault(const, []).append(enum)

    plain: Dict[str, Set[str]] = {}
    members: Dict[str, Set[str]] = {}
    stripped = [(path, strip_comments(text)) for path, text in sources]
    for path, text in stripped:
        for name, enum_type, is_member in _declarations(text, path, type_names):
            (members if is_member else plain).setdefault(name, set()).add(enum_type)

    found: Dict[Tuple[str, str], StateVariable] = {}
    constants = set(const_owner)
    for path, text in stripped:
        for site in find_assignments(text, path, constants):
            owners = {e.type_name for e in const_owner[site.constant]}
            lhs = site.lhs
            is_path = "->" in lhs or "." in lhs
            base = re.sub(r"\[[^\]]*\]", "", lhs)
            last = re.split(r"->|\.", base)[-1]
            if is_path:
                declared = members.get(last, set())
                if declared:
                    matches = declared & owners
                elif len(owners) == 1:
                    matches = owners
                else:
                    matches = set()
            else:
                matches = plain.get(base, set()) & owners
            for enum_type in sorted(matches):
                key = (lhs, enum_type)
                if key not in found:
                    found[key] = StateVariable(lhs, enum_type, [], lhs in blocked)
                found[key].assignment_sites.append(site.location)

    names: Dict[str, List[str]] = {}
    for name, enum_type in found:
        names.setdefault(name, []).append(enum_type)
    for name, types in sorted(names.items()):
        if len(types) > 1:
            diags.append(f"variable {name} collides across enum types {', '.join(sorted(types))}")

    entries = sorted(found.values(), key=lambda v: (v.name, min(v.assignment_sites), v.enum_type))
    for e in entries:
        e.assignment_sites.sort()
    used = {e.enum_type for e in entries}
    return VariableManifest(entries, source_fingerprint(sources),
                            [by_type[t] for t in sorted(used)])


def scan_sources(sources: Sequence[Tuple[str, str]], blocklist: Iterable[str] = (),
                 diagnostics: Optional[List[str]] = None) -> VariableManifest:
    """Run both passes over ``(path, text)`` pairs."""
    enums: List[EnumDefinition] = []
    for path, text in sources:
        enums.extend(scan_enums(text, path, diagnostics))
    return find_state_variables(sources, enums, blocklist, diagnostics)
