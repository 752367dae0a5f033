"""Readers and writers for the toolkit's file formats.

Four text formats live here: automaton files, regex files (header handling
only; the expression grammar is in `regex`), graph files (JSON), and compiled
DFA files (a versioned wrapper around the automaton syntax).  DOT export for
automata and graphs rounds things out.

Symbol syntax: `label^F_R` with F and R written as digit strings when every
index is <= 9 (`a^13_23`), `<>` for the empty sequence, and `{10,2}` for
sequences containing indices >= 10.  Blanks are `<>^n_R` where n is the node
count.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .automaton import Dfa, Transition, TypedAutomaton
from .errors import (ChecksumMismatch, InvariantViolation, ParseError,
                     SemanticError, VersionMismatch)
from .model import (AtomSymbol, BlankSymbol, Edge, Graph, Symbol, Vocabulary,
                    graph, make_atom, make_blank)

DFA_FORMAT_VERSION = 1

_LABEL_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SYMBOL_RE = re.compile(
    r"(?P<head><>|[A-Za-z_][A-Za-z0-9_]*)"
    r"\^(?P<front><>|[0-9]+|\{[0-9,]*\})"
    r"_(?P<rear><>|[0-9]+|\{[0-9,]*\})")


def parse_seq(text: str, line: Optional[int] = None) -> tuple:
    """A node sequence: `<>`, a digit string, or `{i,j,...}`."""
    if text == "<>":
        return ()
    if text.startswith("{"):
        if not text.endswith("}"):
            raise ParseError(f"unterminated sequence {text!r}", line)
        inner = text[1:-1]
        if not inner:
            return ()
        try:
            return tuple(int(p) for p in inner.split(","))
        except ValueError:
            raise ParseError(f"bad sequence {text!r}", line)
    if text.isdigit():
        return tuple(int(c) for c in text)
    raise ParseError(f"bad sequence {text!r}", line)


def parse_symbol(text: str, vocab: Vocabulary,
                 line: Optional[int] = None, column: Optional[int] = None) -> Symbol:
    """One graph symbol, e.g. `a^13_23` or `<>^2_21`."""
    m = _SYMBOL_RE.fullmatch(text.strip())
    if m is None:
        raise ParseError(f"bad symbol {text.strip()!r}", line, column)
    head = m.group("head")
    rear = parse_seq(m.group("rear"), line)
    if head == "<>":
        size_text = m.group("front")
        if not size_text.isdigit():
            raise ParseError(f"blank symbol needs a node count, got {text.strip()!r}", line, column)
        try:
            return make_blank(int(size_text), rear)
        except InvariantViolation as e:
            raise SemanticError(f"line {line}: {e}") from e
    if head not in vocab:
        raise SemanticError(f"line {line}: unknown edge label {head!r}")
    front = parse_seq(m.group("front"), line)
    try:
        return make_atom(head, vocab[head], front, rear)
    except InvariantViolation as e:
        raise SemanticError(f"line {line}: {e}") from e


def symbol_text(sym: Symbol) -> str:
    return str(sym)


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def _logical_lines(text: str) -> List[Tuple[int, str]]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        stripped = _strip_comment(raw).strip()
        if stripped:
            out.append((i, stripped))
    return out


_DECL_RE = re.compile(r"(\*?)([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*([0-9]+)\s*\)")


def _parse_decl_list(body: str, line: int, kind: str) -> List[Tuple[bool, str, int]]:
    """`a(2), b(2)` or `q0(2), *q5(0)` -> [(starred, name, number), ...]."""
    out = []
    for part in body.split(","):
        part = part.strip()
        if not part:
            raise ParseError(f"empty entry in {kind} list", line)
        m = _DECL_RE.fullmatch(part)
        if m is None:
            raise ParseError(f"bad {kind} declaration {part!r}", line)
        out.append((m.group(1) == "*", m.group(2), int(m.group(3))))
    return out


def parse_vocab_lines(lines: List[Tuple[int, str]]) -> Tuple[Vocabulary, List[Tuple[int, str]]]:
    """Consume leading `symbol ...` lines; return (vocab, remaining lines)."""
    vocab: Vocabulary = {}
    rest = []
    for i, (line, body) in enumerate(lines):
        if body.startswith("symbol"):
            for starred, name, rank in _parse_decl_list(body[len("symbol"):], line, "symbol"):
                if starred:
                    raise ParseError(f"symbol {name!r} cannot be starred", line)
                if name in vocab:
                    raise SemanticError(f"line {line}: label {name!r} declared twice")
                if rank < 1:
                    raise SemanticError(f"line {line}: label {name!r} needs rank >= 1")
                vocab[name] = rank
        else:
            rest = lines[i:]
            break
    return vocab, rest


_TRANS_RE = re.compile(
    r"([A-Za-z_][A-Za-z0-9_]*)\s*->\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(\S+)")


def parse_automaton_spec(text: str) -> TypedAutomaton:
    """Automaton file: `symbol` lines, `state` lines (`*` = final), `start`,
    then one transition per line (`q0 -> q1 : a^13_23`)."""
    lines = _logical_lines(text)
    vocab, rest = parse_vocab_lines(lines)
    if not vocab:
        raise ParseError("no symbol declarations", lines[0][0] if lines else 1)

    names: List[str] = []
    ranks: List[int] = []
    final = set()
    index = {}
    start_name = None
    start_line = None
    transitions: List[Transition] = []

    for line, body in rest:
        if body.startswith("state"):
            for starred, name, rank in _parse_decl_list(body[len("state"):], line, "state"):
                if name in index:
                    raise SemanticError(f"line {line}: state {name!r} declared twice")
                index[name] = len(names)
                names.append(name)
                ranks.append(rank)
                if starred:
                    final.add(index[name])
        elif body.startswith("start"):
            if start_name is not None:
                raise SemanticError(f"line {line}: start state declared twice")
            start_name = body[len("start"):].strip()
            start_line = line
            if not _LABEL_RE.fullmatch(start_name):
                raise ParseError(f"bad start declaration {body!r}", line)
        elif "->" in body:
            m = _TRANS_RE.fullmatch(body)
            if m is None:
                raise ParseError(f"bad transition {body!r}", line)
            src, dst, sym_text = m.group(1), m.group(2), m.group(3)
            for name in (src, dst):
                if name not in index:
                    raise SemanticError(f"line {line}: unknown state {name!r}")
            sym = parse_symbol(sym_text, vocab, line)
            fm, fr = sym.type
            if fm != ranks[index[src]]:
                raise SemanticError(
                    f"line {line}: symbol {sym} has front arity {fm}, "
                    f"state {src} has rank {ranks[index[src]]}")
            if fr != ranks[index[dst]]:
                raise SemanticError(
                    f"line {line}: symbol {sym} has rear arity {fr}, "
                    f"state {dst} has rank {ranks[index[dst]]}")
            transitions.append(Transition(index[src], sym, index[dst]))
        else:
            raise ParseError(f"unrecognized line {body!r}", line)

    if start_name is None:
        raise SemanticError("no start state declared")
    if start_name not in index:
        raise SemanticError(f"line {start_line}: unknown start state {start_name!r}")
    return TypedAutomaton(vocab, ranks, index[start_name], final, transitions, names=names)


def write_automaton_spec(auto: TypedAutomaton) -> str:
    out = []
    out.append("symbol " + ", ".join(
        f"{label}({rank})" for label, rank in sorted(auto.vocab.items())))
    decls = []
    for i, name in enumerate(auto.names):
        star = "*" if i in auto.final else ""
        decls.append(f"{star}{name}({auto.ranks[i]})")
    out.append("state " + ", ".join(decls))
    out.append(f"start {auto.names[auto.start]}")
    for t in auto.transitions:
        out.append(f"{auto.names[t.src]} -> {auto.names[t.dst]} : {t.sym}")
    return "\n".join(out) + "\n"


def split_regex_file(text: str) -> Tuple[Vocabulary, str]:
    """Regex file: `symbol` header lines, then the expression body."""
    lines = _logical_lines(text)
    vocab, rest = parse_vocab_lines(lines)
    if not vocab:
        raise ParseError("no symbol declarations", lines[0][0] if lines else 1)
    body = " ".join(body for _, body in rest)
    return vocab, body


# -- graph files --------------------------------------------------------------

def parse_graph(text: str, vocab: Optional[Vocabulary] = None) -> Graph:
    """Graph file: JSON with keys nodes, edges, front, rear."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"bad JSON: {e.msg}", e.lineno, e.colno)
    if not isinstance(doc, dict):
        raise ParseError("graph file must be a JSON object", 1)
    for key in ("nodes", "edges", "front", "rear"):
        if key not in doc:
            raise ParseError(f"graph file lacks key {key!r}", 1)
        if not isinstance(doc[key], list):
            raise ParseError(f"graph key {key!r} must be a list", 1)
    edges = []
    for i, e in enumerate(doc["edges"]):
        if not isinstance(e, dict) or "label" not in e or "att" not in e:
            raise ParseError(f"edge {i} must be an object with label and att", 1)
        if not isinstance(e["att"], list):
            raise ParseError(f"edge {i}: att must be a list", 1)
        edges.append((e["label"], tuple(e["att"])))
    node_ids = [_node_id(v) for v in doc["nodes"]]
    return graph(node_ids,
                 [(label, tuple(_node_id(v) for v in att)) for label, att in edges],
                 [_node_id(v) for v in doc["front"]],
                 [_node_id(v) for v in doc["rear"]],
                 vocab)


def _node_id(v):
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ParseError(f"node ids must be integers or strings, got {v!r}", 1)
    return v


def write_graph(g: Graph) -> str:
    parts = ['{"nodes": %s,' % json.dumps(list(g.nodes))]
    parts.append(' "edges": [')
    lines = []
    for e in g.edges:
        lines.append('  {"label": %s, "att": %s}' % (json.dumps(e.label), json.dumps(list(e.att))))
    parts.append(",\n".join(lines))
    parts.append(' ],')
    parts.append(' "front": %s,' % json.dumps(list(g.front)))
    parts.append(' "rear": %s}' % json.dumps(list(g.rear)))
    return "\n".join(parts) + "\n"


# -- compiled DFA files -------------------------------------------------------

def _checksum(body: str) -> str:
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


def write_dfa(dfa: Dfa) -> str:
    """Versioned DFA file.

    The checksum line covers everything above it (version line and automaton
    body).  Certificate and deferrable lines come after the checksum, so a
    certificate section can be stripped without breaking the file; recognize
    then refuses linear mode on the stripped file.
    """
    body = f"dfa-format {DFA_FORMAT_VERSION}\n" + write_automaton_spec(dfa)
    out = body + f"checksum sha256:{_checksum(body)}\n"
    out += "certificates ts=%s fec=%s\n" % (
        "pass" if dfa.cert_ts else "fail", "pass" if dfa.cert_fec else "fail")
    for i in dfa.deferrable:
        t = dfa.transitions[i]
        out += f"deferrable {dfa.names[t.src]} : {t.sym}\n"
    return out


def read_dfa(text: str) -> Dfa:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("dfa-format"):
        raise ParseError("not a compiled DFA file (missing dfa-format line)", 1)
    version_text = lines[0][len("dfa-format"):].strip()
    if version_text != str(DFA_FORMAT_VERSION):
        raise VersionMismatch(
            f"unsupported dfa-format version {version_text!r}, "
            f"this build reads version {DFA_FORMAT_VERSION}")

    checksum_at = None
    for i, raw in enumerate(lines):
        if raw.startswith("checksum "):
            checksum_at = i
            break
    if checksum_at is None:
        raise ChecksumMismatch("no checksum line")
    declared = lines[checksum_at][len("checksum "):].strip()
    if not declared.startswith("sha256:"):
        raise ChecksumMismatch(f"bad checksum line {lines[checksum_at]!r}")
    body = "\n".join(lines[:checksum_at]) + "\n"
    actual = _checksum(body)
    if declared[len("sha256:"):] != actual:
        raise ChecksumMismatch(
            f"checksum mismatch: file says {declared[len('sha256:'):]}, content is {actual}")

    auto = parse_automaton_spec("\n".join(lines[1:checksum_at]))
    cert_ts = cert_fec = False
    deferrable = []
    name_index = {n: i for i, n in enumerate(auto.names)}
    for offset, raw in enumerate(lines[checksum_at + 1:], start=checksum_at + 2):
        stripped = _strip_comment(raw).strip()
        if not stripped:
            continue
        if stripped.startswith("certificates"):
            fields = dict(
                part.split("=", 1) for part in stripped[len("certificates"):].split())
            cert_ts = fields.get("ts") == "pass"
            cert_fec = fields.get("fec") == "pass"
        elif stripped.startswith("deferrable"):
            m = re.fullmatch(r"deferrable\s+([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(\S+)",
                             stripped)
            if m is None:
                raise ParseError(f"bad deferrable line {stripped!r}", offset)
            state, sym_text = m.group(1), m.group(2)
            if state not in name_index:
                raise SemanticError(f"line {offset}: unknown state {state!r}")
            sym = parse_symbol(sym_text, auto.vocab, offset)
            hits = [i for i, t in enumerate(auto.transitions)
                    if t.src == name_index[state] and t.sym == sym]
            if not hits:
                raise SemanticError(
                    f"line {offset}: no transition {sym} from state {state!r}")
            deferrable.extend(hits)
        else:
            raise ParseError(f"unrecognized line {stripped!r}", offset)
    return Dfa(auto.vocab, auto.ranks, auto.start, auto.final, auto.transitions,
               names=auto.names, cert_ts=cert_ts, cert_fec=cert_fec,
               deferrable=deferrable)


# -- DOT export ---------------------------------------------------------------

def _dot_quote(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(obj: Union[TypedAutomaton, Graph], name: str = "g") -> str:
    if isinstance(obj, TypedAutomaton):
        return _automaton_dot(obj, name)
    if isinstance(obj, Graph):
        return _graph_dot(obj, name)
    raise TypeError(f"cannot export {type(obj).__name__} to DOT")


def _automaton_dot(auto: TypedAutomaton, name: str) -> str:
    out = [f"digraph {name} {{", "  rankdir=LR;",
           '  __start [shape=point, label=""];']
    for i, sname in enumerate(auto.names):
        shape = "doublecircle" if i in auto.final else "circle"
        label = f"{sname} ({auto.ranks[i]})"
        out.append(f"  {_dot_quote(sname)} [shape={shape}, label={_dot_quote(label)}];")
    out.append(f"  __start -> {_dot_quote(auto.names[auto.start])};")
    for t in auto.transitions:
        out.append(f"  {_dot_quote(auto.names[t.src])} -> {_dot_quote(auto.names[t.dst])}"
                   f" [label={_dot_quote(t.sym)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def _graph_dot(g: Graph, name: str) -> str:
    """Rank-2 edges as arrows; other ranks as box nodes with numbered tentacles."""
    out = [f"digraph {name} {{"]
    front_pos = {v: i + 1 for i, v in enumerate(g.front)}
    rear_pos = {v: i + 1 for i, v in enumerate(g.rear)}
    ids = {v: f"n{i}" for i, v in enumerate(g.nodes)}
    for v in g.nodes:
        marks = []
        if v in front_pos:
            marks.append(f"F{front_pos[v]}")
        if v in rear_pos:
            marks.append(f"R{rear_pos[v]}")
        label = str(v) + (" " + ",".join(marks) if marks else "")
        out.append(f"  {ids[v]} [shape=circle, label={_dot_quote(label)}];")
    for k, e in enumerate(g.edges):
        if len(e.att) == 2:
            out.append(f"  {ids[e.att[0]]} -> {ids[e.att[1]]} [label={_dot_quote(e.label)}];")
        else:
            out.append(f"  e{k} [shape=box, label={_dot_quote(e.label)}];")
            for pos, v in enumerate(e.att, start=1):
                out.append(f"  e{k} -> {ids[v]} [label={_dot_quote(pos)}];")
    out.append("}")
    return "\n".join(out) + "\n"
