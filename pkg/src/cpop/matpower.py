"""MATPOWER case ingestion and contingency documents.

Only the numeric-matrix subset of the ``mpc`` case syntax is read:
``mpc.baseMVA = <number>;`` and ``mpc.<name> = [ ... ];`` blocks. Other
assignments (strings, cell arrays) are skipped.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .builders import Contingency
from .errors import (
    DanglingReference,
    ParseError,
    SchemaError,
    UnknownElement,
    UnsupportedCostModel,
)
from .network import (
    BASE_CASE,
    Link,
    Network,
    branch_admittance,
    generator_element,
    load_element,
    pi_line_element,
    shunt_element,
    voltage_element,
)

# minimum column counts of the standard matrices
_MIN_COLS = {"bus": 13, "gen": 10, "branch": 11, "gencost": 4}


@dataclass
class BusRecord:
    id: int
    type: int
    pd: float
    qd: float
    gs: float
    bs: float
    vm: float
    va: float
    vmax: float
    vmin: float
    line: int = 0


@dataclass
class GenRecord:
    bus: int
    pg: float
    qg: float
    qmax: float
    qmin: float
    pmax: float
    pmin: float
    status: int
    line: int = 0

    @property
    def in_service(self) -> bool:
        return self.status > 0


@dataclass
class BranchRecord:
    from_bus: int
    to_bus: int
    r: float
    x: float
    b: float
    rate_a: float
    ratio: float
    angle: float
    status: int
    line: int = 0

    @property
    def in_service(self) -> bool:
        return self.status > 0


@dataclass
class GenCost:
    model: int
    coefficients: Tuple[float, ...]  # highest degree first

    def quadratic(self) -> Tuple[float, float, float]:
        c = (0.0,) * (3 - len(self.coefficients)) + tuple(self.coefficients)
        return c[0], c[1], c[2]


@dataclass
class MatpowerCase:
    base_mva: float
    buses: List[BusRecord] = field(default_factory=list)
    gens: List[GenRecord] = field(default_factory=list)
    branches: List[BranchRecord] = field(default_factory=list)
    gencost: List[GenCost] = field(default_factory=list)


_ASSIGN = re.compile(r"^\s*mpc\.(\w+)\s*=\s*(.*)$")


def _strip_comment(line: str) -> str:
    # '%' never appears inside the numeric matrices we read
    cut = line.find("%")
    return line if cut < 0 else line[:cut]


def _numbers(chunk: str, lineno: int) -> List[float]:
    out = []
    for tok in chunk.replace(",", " ").split():
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"not a number: {tok!r}", lineno) from None
    return out


def _read_matrices(text: str):
    scalars: Dict[str, Tuple[float, int]] = {}
    matrices: Dict[str, List[Tuple[List[float], int]]] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        lineno = i + 1
        line = _strip_comment(lines[i])
        i += 1
        m = _ASSIGN.match(line)
        if not m:
            continue
        name, rhs = m.group(1), m.group(2).strip()
        if rhs.startswith("["):
            rows = []
            pending = []
            pending_line = lineno
            body = rhs[1:]
            cur = lineno
            while True:
                end = body.find("]")
                segment = body if end < 0 else body[:end]
                parts = segment.split(";")
                for k, part in enumerate(parts):
                    nums = _numbers(part, cur)
                    if nums and not pending:
                        pending_line = cur
                    pending.extend(nums)
                    if k < len(parts) - 1 and pending:
                        rows.append((pending, pending_line))
                        pending = []
                if pending:
                    # a newline also ends a row
                    rows.append((pending, pending_line))
                    pending = []
                if end >= 0:
                    break
                if i >= len(lines):
                    raise ParseError(f"unterminated matrix mpc.{name}", lineno)
                cur = i + 1
                body = _strip_comment(lines[i])
                i += 1
            matrices[name] = rows
        elif rhs.startswith("{"):
            while "}" not in line and i < len(lines):
                line = _strip_comment(lines[i])
                i += 1
        else:
            value = rhs.rstrip(";").strip()
            try:
                scalars[name] = (float(value), lineno)
            except ValueError:
                pass
    return scalars, matrices


def _check_shape(name, rows):
    if not rows:
        return
    width = len(rows[0][0])
    if width < _MIN_COLS.get(name, 1):
        raise ParseError(f"mpc.{name} needs at least {_MIN_COLS[name]} columns, got {width}", rows[0][1])
    for vals, lineno in rows:
        if len(vals) != width:
            raise ParseError(f"mpc.{name} row has {len(vals)} columns, expected {width}", lineno)


def parse_matpower(text: str) -> MatpowerCase:
    scalars, matrices = _read_matrices(text)
    if "baseMVA" not in scalars:
        raise ParseError("missing mpc.baseMVA")
    base, base_line = scalars["baseMVA"]
    if not base > 0:
        raise ParseError("baseMVA must be positive", base_line)
    for name in ("bus", "gen", "branch"):
        if name not in matrices:
            raise ParseError(f"missing mpc.{name}")
    for name, rows in matrices.items():
        _check_shape(name, rows)

    case = MatpowerCase(base_mva=base)
    for v, ln in matrices["bus"]:
        case.buses.append(BusRecord(int(v[0]), int(v[1]), v[2], v[3], v[4], v[5], v[7], v[8], v[11], v[12], ln))
    ids = {b.id for b in case.buses}
    if len(ids) != len(case.buses):
        raise ParseError("duplicate bus id")

    for v, ln in matrices["gen"]:
        g = GenRecord(int(v[0]), v[1], v[2], v[3], v[4], v[8], v[9], int(v[7]), ln)
        if g.bus not in ids:
            raise DanglingReference(f"generator at unknown bus {g.bus}", ln)
        case.gens.append(g)

    for v, ln in matrices["branch"]:
        br = BranchRecord(int(v[0]), int(v[1]), v[2], v[3], v[4], v[5], v[8], v[9], int(v[10]), ln)
        for b in (br.from_bus, br.to_bus):
            if b not in ids:
                raise DanglingReference(f"branch endpoint {b} is not a bus", ln)
        case.branches.append(br)

    for v, ln in matrices.get("gencost", []):
        model, n = int(v[0]), int(v[3])
        if model != 2:
            raise UnsupportedCostModel(f"cost model {model} (only polynomial model 2)", ln)
        if not 1 <= n <= 3:
            raise UnsupportedCostModel(f"polynomial cost with {n} coefficients (at most 3)", ln)
        if len(v) < 4 + n:
            raise ParseError("gencost row shorter than its coefficient count", ln)
        case.gencost.append(GenCost(model, tuple(v[4 : 4 + n])))
    if case.gencost and len(case.gencost) != len(case.gens):
        raise ParseError(f"{len(case.gencost)} gencost rows for {len(case.gens)} generators")
    return case


def read_matpower(path) -> MatpowerCase:
    with open(path) as fh:
        return parse_matpower(fh.read())


def generator_ids(case: MatpowerCase) -> List[str]:
    """Generator ids ``"<bus>_<k>"``, ``k`` counting rows at that bus from 1."""
    count: Dict[int, int] = {}
    out = []
    for g in case.gens:
        count[g.bus] = count.get(g.bus, 0) + 1
        out.append(f"{g.bus}_{count[g.bus]}")
    return out


def branch_links(case: MatpowerCase) -> List[Link]:
    """Link per branch row; parallel rows get circuit numbers 1, 2, ..."""
    count: Dict[Tuple[int, int], int] = {}
    out = []
    for br in case.branches:
        key = (br.from_bus, br.to_bus)
        count[key] = count.get(key, 0) + 1
        out.append(Link(br.from_bus, br.to_bus, count[key]))
    return out


def case_to_network(case: MatpowerCase, case_tag: str = BASE_CASE) -> Network:
    base = case.base_mva
    net = Network(case_tag)
    for b in case.buses:
        net.add_bus(b.id, voltage_element(b.vmin, b.vmax))
        if b.pd or b.qd:
            net.add_bus_element(b.id, load_element(complex(b.pd, b.qd) / base))
        if b.gs or b.bs:
            net.add_bus_element(b.id, shunt_element(b.gs / base, b.bs / base))

    for k, (g, gid) in enumerate(zip(case.gens, generator_ids(case))):
        if not g.in_service:
            continue
        cost = (0.0, 0.0, 0.0)
        if case.gencost:
            c2, c1, c0 = case.gencost[k].quadratic()
            cost = (c2 * base**2, c1 * base, c0)
        net.add_bus_element(
            g.bus,
            generator_element(gid, g.pmin / base, g.pmax / base, g.qmin / base, g.qmax / base, cost),
        )

    for br, link in zip(case.branches, branch_links(case)):
        if not br.in_service:
            continue
        y = branch_admittance(br.r, br.x, br.b, br.ratio or 1.0, math.radians(br.angle))
        smax = br.rate_a / base if br.rate_a > 0 else None
        if link not in net.link_elements:
            net.add_link(link.origin, link.dest, link.ckt)
        net.add_link_element(link, pi_line_element(y, smax))
    return net


_CONTINGENCY_KEYS = {"branch": ("id", "type", "from", "to"), "generator": ("id", "type", "bus", "index")}


def _require_int(entry, key, where):
    val = entry.get(key)
    if isinstance(val, bool) or not isinstance(val, int):
        raise SchemaError(f"{where}: field {key!r} must be an integer")
    return val


def parse_contingencies(text: str, net: Optional[Network] = None):
    """Read a JSON contingency document.

    Returns ``(contingencies, participation)``. When ``participation`` is
    absent it defaults to ``1/|G|`` per generator of ``net`` (``None`` if no
    network is given). With ``net``, every referenced element is checked.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("document must be an object")
    extra = set(doc) - {"contingencies", "participation"}
    if extra:
        raise SchemaError(f"unknown fields: {sorted(extra)}")
    entries = doc.get("contingencies", [])
    if not isinstance(entries, list):
        raise SchemaError("'contingencies' must be a list")

    out = []
    ids = set()
    for n, entry in enumerate(entries):
        where = f"contingency #{n}"
        if not isinstance(entry, dict):
            raise SchemaError(f"{where}: must be an object")
        kind = entry.get("type")
        if kind not in _CONTINGENCY_KEYS:
            raise SchemaError(f"{where}: 'type' must be 'branch' or 'generator'")
        missing = [k for k in _CONTINGENCY_KEYS[kind] if k not in entry]
        if missing:
            raise SchemaError(f"{where}: missing fields {missing}")
        cid = entry["id"]
        if not isinstance(cid, str) or not cid or any(ch.isspace() or ch in "*^()/" for ch in cid):
            raise SchemaError(f"{where}: 'id' must be a nonempty name without spaces or reserved characters")
        if cid in ids:
            raise SchemaError(f"{where}: duplicate id {cid!r}")
        ids.add(cid)
        if kind == "branch":
            link = Link(
                _require_int(entry, "from", where),
                _require_int(entry, "to", where),
                _require_int(entry, "ckt", where) if "ckt" in entry else 1,
            )
            if net is not None and link not in net.link_elements:
                raise UnknownElement(f"{where}: no branch {link}")
            out.append(Contingency(cid, "branch", link))
        else:
            target = (_require_int(entry, "bus", where), _require_int(entry, "index", where))
            if net is not None:
                at_bus = [el for bus, el in net.generators() if bus == target[0]]
                if not 1 <= target[1] <= len(at_bus):
                    raise UnknownElement(f"{where}: no generator {target[1]} at bus {target[0]}")
            out.append(Contingency(cid, "generator", target))

    part = doc.get("participation")
    if part is None:
        if net is None:
            return out, None
        gens = net.generators()
        return out, {el.gen_id: 1.0 / len(gens) for _, el in gens} if gens else {}
    if not isinstance(part, dict):
        raise SchemaError("'participation' must be an object")
    table = {}
    for gid, alpha in part.items():
        if isinstance(alpha, bool) or not isinstance(alpha, (int, float)) or not math.isfinite(alpha):
            raise SchemaError(f"participation of {gid}: not a number")
        if alpha < 0:
            raise SchemaError(f"participation of {gid} is negative")
        table[str(gid)] = float(alpha)
    if net is not None:
        known = {el.gen_id for _, el in net.generators()}
        for gid in table:
            if gid not in known:
                raise UnknownElement(f"participation names unknown generator {gid}")
    return out, table


def read_contingencies(path, net: Optional[Network] = None):
    with open(path) as fh:
        return parse_contingencies(fh.read(), net)
