"""Element-based power network description and its assembly into a Problem.

A network is a set of buses and oriented links. Each bus and link carries
a list of elements; an element declares its variables, its share of the
bus power balance (or the power at both link ends), its own constraints
and its cost. :func:`assemble` sums the contributions bus by bus.

Balance convention: at every bus the assembled equality reads
``sum(bus contributions) + sum(link end powers) = 0`` with loads counted
positive and generation negative.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from .errors import InvalidBounds, MissingVoltage, UnknownTarget, ZeroImpedance
from .poly import ZERO, Kind, Polynomial, Variable, abs2, conj, imag_part, real_part
from .problem import Problem

BASE_CASE = "base"

Row = Tuple[str, Polynomial, object, object]


def voltage_name(case_tag: str, bus) -> str:
    return f"V_{case_tag}_{bus}"


def generator_name(case_tag: str, gen_id: str) -> str:
    return f"Sgen_{case_tag}_{gen_id}"


@dataclass(frozen=True)
class Link:
    origin: Hashable
    dest: Hashable
    ckt: int = 1

    def __str__(self):
        return f"{self.origin}-{self.dest}-{self.ckt}"


class Context:
    """What an element sees during assembly: the case tag and voltage lookup."""

    def __init__(self, net: "Network", where):
        self.net = net
        self.case_tag = net.case_tag
        self.where = where

    def voltage(self, bus) -> Variable:
        if not any(isinstance(el, VoltageElement) for el in self.net.bus_elements.get(bus, ())):
            raise MissingVoltage(f"bus {bus} has no voltage element (needed by {self.where})")
        return Variable(voltage_name(self.case_tag, bus), Kind.COMPLEX)


class BusElement:
    """Base bus element: contributes nothing unless overridden."""

    kind = "element"

    def variables(self, ctx: Context, bus) -> List[Variable]:
        return []

    def balance(self, ctx: Context, bus) -> Polynomial:
        return ZERO

    def constraints(self, ctx: Context, bus) -> List[Row]:
        return []

    def cost(self, ctx: Context, bus) -> Polynomial:
        return ZERO


class LinkElement:
    """Base link element; subclasses provide the powers at both ends."""

    kind = "link"

    def variables(self, ctx: Context, link: Link) -> List[Variable]:
        return []

    def power_origin(self, ctx: Context, link: Link) -> Polynomial:
        return ZERO

    def power_destination(self, ctx: Context, link: Link) -> Polynomial:
        return ZERO

    def constraints(self, ctx: Context, link: Link) -> List[Row]:
        return []

    def cost(self, ctx: Context, link: Link) -> Polynomial:
        return ZERO


@dataclass
class VoltageElement(BusElement):
    vmin: float
    vmax: float
    kind = "voltage"

    def __post_init__(self):
        if not 0 < self.vmin <= self.vmax:
            raise InvalidBounds(f"need 0 < vmin <= vmax, got {self.vmin}, {self.vmax}")

    def variables(self, ctx, bus):
        return [Variable(voltage_name(ctx.case_tag, bus), Kind.COMPLEX)]

    def constraints(self, ctx, bus):
        v = ctx.voltage(bus)
        return [("vmag", abs2(v), self.vmin**2, self.vmax**2)]


@dataclass
class LoadElement(BusElement):
    power: complex
    kind = "load"

    def balance(self, ctx, bus):
        return Polynomial.constant(self.power) if self.power else ZERO


@dataclass
class ShuntElement(BusElement):
    """Fixed shunt consuming ``(gs - i*bs) * |V|^2``."""

    gs: float
    bs: float
    kind = "shunt"

    def balance(self, ctx, bus):
        v = ctx.voltage(bus)
        y = complex(self.gs, -self.bs)
        return y * abs2(v) if y else ZERO


@dataclass
class GeneratorElement(BusElement):
    gen_id: str
    pmin: float
    pmax: float
    qmin: float
    qmax: float
    cost_coeffs: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    kind = "generator"

    def __post_init__(self):
        if self.pmin > self.pmax or self.qmin > self.qmax:
            raise InvalidBounds(f"generator {self.gen_id}: inverted power bounds")

    def power(self, ctx) -> Variable:
        return Variable(generator_name(ctx.case_tag, self.gen_id), Kind.COMPLEX)

    def variables(self, ctx, bus):
        return [self.power(ctx)]

    def balance(self, ctx, bus):
        return -self.power(ctx)

    def constraints(self, ctx, bus):
        s = self.power(ctx)
        return [
            ("pbox", real_part(s), self.pmin, self.pmax),
            ("qbox", imag_part(s), self.qmin, self.qmax),
        ]

    def cost(self, ctx, bus):
        c2, c1, c0 = self.cost_coeffs
        p = real_part(self.power(ctx))
        out = ZERO
        if c2:
            out = out + c2 * p * p
        if c1:
            out = out + c1 * p
        if c0:
            out = out + c0
        return out


@dataclass(frozen=True)
class BranchAdmittance:
    y11: complex
    y12: complex
    y21: complex
    y22: complex


def branch_admittance(r: float, x: float, bc: float = 0.0, tap: float = 1.0, shift: float = 0.0) -> BranchAdmittance:
    """Pi-branch two-port with off-nominal tap on the origin side; ``shift`` in radians."""
    if r == 0 and x == 0:
        raise ZeroImpedance("branch has zero series impedance")
    if tap <= 0:
        raise InvalidBounds("tap ratio must be positive")
    ys = 1 / complex(r, x)
    half_b = 0.5j * bc
    return BranchAdmittance(
        y11=(ys + half_b) / tap**2,
        y12=-ys / (tap * cmath.exp(-1j * shift)),
        y21=-ys / (tap * cmath.exp(1j * shift)),
        y22=ys + half_b,
    )


@dataclass
class PiLineElement(LinkElement):
    admittance: BranchAdmittance
    smax: Optional[float] = None
    kind = "line"

    def power_origin(self, ctx, link):
        vo, vd = ctx.voltage(link.origin), ctx.voltage(link.dest)
        y = self.admittance
        return vo * conj(y.y11 * vo + y.y12 * vd)

    def power_destination(self, ctx, link):
        vo, vd = ctx.voltage(link.origin), ctx.voltage(link.dest)
        y = self.admittance
        return vd * conj(y.y21 * vo + y.y22 * vd)

    def constraints(self, ctx, link):
        if self.smax is None:
            return []
        limit = self.smax**2
        return [
            ("so_max", abs2(self.power_origin(ctx, link)), None, limit),
            ("sd_max", abs2(self.power_destination(ctx, link)), None, limit),
        ]


def voltage_element(vmin: float, vmax: float) -> VoltageElement:
    return VoltageElement(vmin, vmax)


def load_element(power: complex) -> LoadElement:
    return LoadElement(complex(power))


def shunt_element(gs: float, bs: float) -> ShuntElement:
    return ShuntElement(gs, bs)


def generator_element(gen_id, pmin, pmax, qmin, qmax, cost=(0.0, 0.0, 0.0)) -> GeneratorElement:
    return GeneratorElement(str(gen_id), pmin, pmax, qmin, qmax, tuple(cost))


def pi_line_element(admittance: BranchAdmittance, smax: Optional[float] = None) -> PiLineElement:
    return PiLineElement(admittance, smax)


class Network:
    def __init__(self, case_tag: str = BASE_CASE):
        self.case_tag = case_tag
        self.bus_elements: Dict[Hashable, List[BusElement]] = {}
        self.link_elements: Dict[Link, List[LinkElement]] = {}

    def __repr__(self):
        return f"Network({self.case_tag!r}, {len(self.bus_elements)} buses, {len(self.link_elements)} links)"

    @property
    def buses(self):
        return list(self.bus_elements)

    @property
    def links(self):
        return list(self.link_elements)

    def add_bus(self, bus, *elements: BusElement) -> "Network":
        self.bus_elements.setdefault(bus, [])
        for el in elements:
            self.add_bus_element(bus, el)
        return self

    def add_bus_element(self, bus, element: BusElement) -> "Network":
        self.bus_elements.setdefault(bus, []).append(element)
        return self

    def add_link(self, origin, dest, ckt: int = 1, *elements: LinkElement) -> Link:
        for b in (origin, dest):
            if b not in self.bus_elements:
                raise UnknownTarget(f"link endpoint {b} is not a declared bus")
        link = Link(origin, dest, ckt)
        self.link_elements.setdefault(link, [])
        for el in elements:
            self.link_elements[link].append(el)
        return link

    def add_link_element(self, link: Link, element: LinkElement) -> "Network":
        if link not in self.link_elements:
            raise UnknownTarget(f"unknown link {link}")
        self.link_elements[link].append(element)
        return self

    def generators(self) -> List[Tuple[Hashable, GeneratorElement]]:
        return [
            (bus, el)
            for bus, els in self.bus_elements.items()
            for el in els
            if isinstance(el, GeneratorElement)
        ]

    def voltage_bounds(self, bus) -> Tuple[float, float]:
        for el in self.bus_elements.get(bus, ()):
            if isinstance(el, VoltageElement):
                return el.vmin, el.vmax
        raise MissingVoltage(f"bus {bus} has no voltage element")

    def copy(self, case_tag: str = None) -> "Network":
        new = Network(self.case_tag if case_tag is None else case_tag)
        new.bus_elements = {b: list(els) for b, els in self.bus_elements.items()}
        new.link_elements = {l: list(els) for l, els in self.link_elements.items()}
        return new


def _add_rows(pb: Problem, prefix: str, rows: Sequence[Row]):
    for row, body, lo, hi in rows:
        pb.add_constraint(f"{prefix}/{row}", body, lo, hi)


def balance_name(case_tag: str, bus) -> str:
    return f"{case_tag}/balance/{bus}"


def assemble(net: Network) -> Problem:
    pb = Problem()
    tag = net.case_tag
    balance = {bus: ZERO for bus in net.bus_elements}
    costs = []
    element_rows = []

    for bus, elements in net.bus_elements.items():
        for idx, el in enumerate(elements):
            ctx = Context(net, f"{el.kind} at bus {bus}")
            for v in el.variables(ctx, bus):
                pb.register(v)
            balance[bus] = balance[bus] + el.balance(ctx, bus)
            element_rows.append((f"{tag}/{el.kind}/{bus}/{idx}", el.constraints(ctx, bus)))
            costs.append(el.cost(ctx, bus))

    for link, elements in net.link_elements.items():
        for idx, el in enumerate(elements):
            ctx = Context(net, f"{el.kind} on link {link}")
            for v in el.variables(ctx, link):
                pb.register(v)
            balance[link.origin] = balance[link.origin] + el.power_origin(ctx, link)
            balance[link.dest] = balance[link.dest] + el.power_destination(ctx, link)
            element_rows.append((f"{tag}/{el.kind}/{link}/{idx}", el.constraints(ctx, link)))
            costs.append(el.cost(ctx, link))

    for bus, body in balance.items():
        pb.add_constraint(balance_name(tag, bus), body, 0j, 0j)
    for prefix, rows in element_rows:
        _add_rows(pb, prefix, rows)

    objective = ZERO
    for c in costs:
        objective = objective + c
    pb.set_objective(objective)
    return pb
