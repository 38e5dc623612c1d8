"""Plain-text file formats: .gr graphs, PACE .td, .bcd, ladders, matchings and clustering instances."""
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from pydantic import ValidationError

from metric_sparsity.coreset import ClusteringInstance
from metric_sparsity.decompositions import BufferedCopDecomposition, Supernode, TreeDecomposition
from metric_sparsity.errors import FormatError, MetricSparsityError
from metric_sparsity.graph import WeightedGraph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


# === TOKENS ===

def parse_weight(token: str, path: str = "<input>", line: int = 0) -> Optional[Any]:
    """Integer, decimal, p/q fraction, or `inf` (returned as None: a blocked edge)."""
    try:
        if token.lower() == "inf":
            return None
        if "/" in token:
            value: Any = Fraction(token)
        elif token.lstrip("+-").isdigit():
            value = int(token)
        else:
            value = float(token)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"bad weight {token!r}", path, line)
    if value < 0:
        raise FormatError(f"negative weight {token!r}", path, line)
    return value


def format_weight(w: Any) -> str:
    if w is None:
        return "inf"
    if isinstance(w, Fraction):
        return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"
    if isinstance(w, float):
        return repr(w)
    return str(int(w))


def _ints(tokens: List[str], path: str, line: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise FormatError(f"expected integers, got {' '.join(tokens)!r}", path, line)


def _lines(path: PathLike, comments: Tuple[str, ...] = ("#",)) -> Iterator[Tuple[int, List[str]]]:
    """Nonblank, non-comment lines as (line number, tokens)."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise FileNotFoundError(f"Cannot read {path}: {e}")
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split()
        if tokens and not tokens[0].startswith(comments):
            yield number, tokens


def _build(path: str, factory, **fields):
    try:
        return factory(**fields)
    except (ValidationError, MetricSparsityError) as e:
        raise FormatError(str(e).splitlines()[0], path)


# === GRAPHS ===

def _read_graph_lines(path: str, lines: List[Tuple[int, List[str]]]) -> WeightedGraph:
    if not lines:
        raise FormatError("missing header line `n m`", path)
    number, header = lines[0]
    if len(header) != 2:
        raise FormatError("header must be `n m`", path, number)
    n, m = _ints(header, path, number)
    edges, blocked = [], []
    for number, tokens in lines[1:]:
        if len(tokens) != 3:
            raise FormatError("edge line must be `u v w`", path, number)
        u, v = _ints(tokens[:2], path, number)
        w = parse_weight(tokens[2], path, number)
        if w is None:
            blocked.append((u, v))
        else:
            edges.append((u, v, w))
    if len(edges) + len(blocked) != m:
        raise FormatError(f"header announces {m} edges, found {len(edges) + len(blocked)}", path)
    return _build(path, WeightedGraph, vertex_count=n, edges=edges, blocked_edges=blocked)


def read_graph(path: PathLike) -> WeightedGraph:
    graph = _read_graph_lines(str(path), list(_lines(path)))
    logger.info(f"Loaded graph {path}: {graph.vertex_count} vertices, {len(graph.edges)} edges")
    return graph


def _graph_text(G: WeightedGraph) -> List[str]:
    out = [f"{G.vertex_count} {len(G.edges) + len(G.blocked_edges)}"]
    out.extend(f"{u} {v} {format_weight(w)}" for u, v, w in G.edges)
    out.extend(f"{u} {v} inf" for u, v in G.blocked_edges)
    return out


def write_graph(G: WeightedGraph, path: PathLike) -> None:
    Path(path).write_text("\n".join(_graph_text(G)) + "\n")


# === TREE DECOMPOSITIONS ===

def read_td(path: PathLike) -> TreeDecomposition:
    path = str(path)
    bags: Dict[int, List[int]] = {}
    edges: List[Tuple[int, int]] = []
    header = None
    for number, tokens in _lines(path, comments=("c", "#")):
        if tokens[0] == "s":
            if len(tokens) != 5 or tokens[1] != "td":
                raise FormatError("solution line must be `s td <bags> <max bag size> <n>`", path, number)
            header = _ints(tokens[2:], path, number)
        elif tokens[0] == "b":
            ids = _ints(tokens[1:], path, number)
            if not ids:
                raise FormatError("bag line needs an id", path, number)
            if ids[0] in bags:
                raise FormatError(f"bag {ids[0]} defined twice", path, number)
            bags[ids[0]] = ids[1:]
        else:
            if len(tokens) != 2:
                raise FormatError("tree edge line must be `a b`", path, number)
            a, b = _ints(tokens, path, number)
            edges.append((a, b))
    if header is None:
        raise FormatError("missing `s td` line", path)
    if header[0] != len(bags):
        raise FormatError(f"header announces {header[0]} bags, found {len(bags)}", path)
    return _build(path, TreeDecomposition, bags=bags, edges=edges)


def write_td(td: TreeDecomposition, path: PathLike, vertex_count: int) -> None:
    lines = [f"s td {len(td.bags)} {td.max_bag_size} {vertex_count}"]
    lines.extend(" ".join(["b", str(t)] + [str(v) for v in bag]) for t, bag in sorted(td.bags.items()))
    lines.extend(f"{a} {b}" for a, b in td.edges)
    Path(path).write_text("\n".join(lines) + "\n")


# === BUFFERED COP DECOMPOSITIONS ===

def read_bcd(path: PathLike) -> BufferedCopDecomposition:
    path = str(path)
    supernodes = []
    for number, tokens in _lines(path):
        if tokens[0] != "s" or len(tokens) < 5 or tokens[3] != "r":
            raise FormatError("supernode line must be `s <id> <parent> r <root> V ... T ...`", path, number)
        sid, parent, root = _ints([tokens[1], tokens[2], tokens[4]], path, number)
        rest = tokens[5:]
        if not rest or rest[0] != "V":
            raise FormatError("missing `V` section", path, number)
        split = rest.index("T") if "T" in rest else len(rest)
        vertices = _ints(rest[1:split], path, number)
        flat = _ints(rest[split + 1:], path, number)
        if len(flat) % 2:
            raise FormatError("skeleton edges must come in pairs", path, number)
        skeleton = list(zip(flat[0::2], flat[1::2]))
        supernodes.append(_build(path, Supernode, id=sid, parent=parent, root=root, vertices=vertices, skeleton=skeleton))
    return BufferedCopDecomposition(supernodes=supernodes)


def write_bcd(bcd: BufferedCopDecomposition, path: PathLike) -> None:
    lines = []
    for s in bcd.supernodes:
        skeleton = [str(x) for edge in s.skeleton for x in edge]
        lines.append(" ".join(
            ["s", str(s.id), str(s.parent), "r", str(s.root), "V"] + [str(v) for v in s.vertices] + ["T"] + skeleton))
    Path(path).write_text("\n".join(lines) + "\n")


# === LADDERS AND MATCHINGS ===

def _read_pairs(path: PathLike) -> List[Tuple[int, int]]:
    pairs = []
    for number, tokens in _lines(path):
        if len(tokens) != 2:
            raise FormatError("expected a pair `a b`", str(path), number)
        a, b = _ints(tokens, str(path), number)
        pairs.append((a, b))
    return pairs


def _write_pairs(pairs: List[Tuple[int, int]], path: PathLike, header: Optional[str] = None) -> None:
    lines = [f"# {header}"] if header else []
    lines.extend(f"{a} {b}" for a, b in pairs)
    Path(path).write_text("\n".join(lines) + "\n")


def read_ladder(path: PathLike) -> List[Tuple[int, int]]:
    """Ladder pairs `x_i p_i` in order."""
    return _read_pairs(path)


def write_ladder(pairs: List[Tuple[int, int]], path: PathLike, epsilon: Any = None, width: Any = None) -> None:
    header = None
    if epsilon is not None:
        header = f"epsilon {format_weight(epsilon)} width {format_weight(width)}"
    _write_pairs(pairs, path, header)


def read_matching(path: PathLike) -> List[Tuple[int, int]]:
    return _read_pairs(path)


def write_matching(pairs: List[Tuple[int, int]], path: PathLike) -> None:
    _write_pairs(pairs, path)


# === CLUSTERING INSTANCES ===

def read_instance(path: PathLike) -> ClusteringInstance:
    """A .gr body followed by `c <clients>`, `f <facilities>` and `k <int>` lines."""
    path = str(path)
    graph_lines = []
    clients: List[int] = []
    facilities: List[int] = []
    k = None
    for number, tokens in _lines(path):
        if tokens[0] == "c":
            clients.extend(_ints(tokens[1:], path, number))
        elif tokens[0] == "f":
            facilities.extend(_ints(tokens[1:], path, number))
        elif tokens[0] == "k":
            if len(tokens) != 2:
                raise FormatError("`k` line takes one integer", path, number)
            k = _ints(tokens[1:], path, number)[0]
        else:
            graph_lines.append((number, tokens))
    if k is None:
        raise FormatError("missing `k` line", path)
    graph = _read_graph_lines(path, graph_lines)
    return _build(path, ClusteringInstance, graph=graph, clients=clients, facilities=facilities, k=k)


def write_instance(inst: ClusteringInstance, path: PathLike) -> None:
    lines = _graph_text(inst.graph)
    lines.append(" ".join(["c"] + [str(p) for p in inst.clients]))
    lines.append(" ".join(["f"] + [str(f) for f in inst.facilities]))
    lines.append(f"k {inst.k}")
    Path(path).write_text("\n".join(lines) + "\n")


# === VERTEX LISTS ===

def parse_vertex_list(spec: str) -> List[int]:
    """Comma-separated ids, `a-b` ranges, or a file of ids (or a JSON report holding `S`)."""
    if Path(spec).is_file():
        return read_vertex_list(spec)
    out: List[int] = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            if "-" in chunk:
                lo, hi = (int(x) for x in chunk.split("-", 1))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(chunk))
        except ValueError:
            raise FormatError(f"bad vertex list entry {chunk!r}", "<argument>")
    return out


def read_vertex_list(path: PathLike) -> List[int]:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise FormatError(f"invalid JSON: {e}", str(path))
        found = data.get("outputs", data).get("S")
        if found is None:
            raise FormatError("JSON report has no `S` field", str(path))
        return [int(v) for v in found]
    return [v for number, tokens in _lines(path) for v in _ints(tokens, str(path), number)]
