"""ACOPF and preventive security-constrained OPF builders."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Hashable, Mapping, Optional, Sequence, Tuple, Union

from .errors import DuplicateName, MissingParticipation, SchemaError, UnknownTarget
from .network import (
    GeneratorElement,
    Link,
    Network,
    assemble,
    generator_name,
    voltage_name,
)
from .poly import Kind, Variable, abs2, imag_part, real_part
from .problem import Problem


@dataclass(frozen=True)
class Contingency:
    """Loss of one element.

    ``target`` is a :class:`Link` for ``kind="branch"``; for
    ``kind="generator"`` it is a generator id or a ``(bus, index)`` pair
    where ``index`` counts generators at that bus from 1.
    """

    id: str
    kind: str
    target: Union[Link, str, Tuple[Hashable, int]]

    def __post_init__(self):
        if self.kind not in ("branch", "generator"):
            raise SchemaError(f"contingency kind must be 'branch' or 'generator', got {self.kind!r}")


@dataclass(frozen=True)
class PscopfOptions:
    """Big-M constants; ``None`` selects the automatic values
    ``Vmax^2 - Vmin^2`` (generator bus) and ``Qmax - Qmin``."""

    big_m_v: Optional[float] = None
    big_m_q: Optional[float] = None


def build_acopf(net: Network) -> Problem:
    return assemble(net)


def _find_generator(net: Network, target) -> Tuple[Hashable, GeneratorElement]:
    gens = net.generators()
    if isinstance(target, tuple):
        bus, index = target
        at_bus = [g for g in gens if g[0] == bus]
        if 1 <= index <= len(at_bus):
            return at_bus[index - 1]
    else:
        for bus, el in gens:
            if el.gen_id == str(target):
                return bus, el
    raise UnknownTarget(f"no generator {target!r} in the network")


def apply_contingency(net: Network, c: Contingency) -> Network:
    out = net.copy(case_tag=c.id)
    if c.kind == "branch":
        link = c.target if isinstance(c.target, Link) else Link(*c.target)
        if link not in out.link_elements:
            raise UnknownTarget(f"no branch {link} in the network")
        out.link_elements[link] = []
    else:
        bus, el = _find_generator(out, c.target)
        out.bus_elements[bus] = [e for e in out.bus_elements[bus] if e is not el]
    return out


def uniform_participation(net: Network) -> Dict[str, float]:
    gens = net.generators()
    if not gens:
        return {}
    return {el.gen_id: 1.0 / len(gens) for _, el in gens}


def _check_participation(net: Network, part: Mapping[str, float]):
    for _, el in net.generators():
        if el.gen_id not in part:
            raise MissingParticipation(f"no participation factor for generator {el.gen_id}")
    if any(a < 0 for a in part.values()):
        raise SchemaError("participation factors must be nonnegative")
    if not any(a > 0 for a in part.values()):
        raise SchemaError("at least one participation factor must be positive")


def switching_binaries(case_id: str, gen_id: str) -> Tuple[Variable, Variable]:
    return (
        Variable(f"bplus_{case_id}_{gen_id}", Kind.BOOL),
        Variable(f"bminus_{case_id}_{gen_id}", Kind.BOOL),
    )


def shortfall_variable(case_id: str) -> Variable:
    return Variable(f"Delta_{case_id}", Kind.REAL)


def _merge(pb: Problem, sub: Problem):
    for v in sub.variables.values():
        pb.register(v)
    for name, ctr in sub.constraints.items():
        pb.add_constraint(name, ctr.body, ctr.lower, ctr.upper)


def build_pscopf(
    net: Network,
    contingencies: Sequence[Contingency],
    participation: Optional[Mapping[str, float]] = None,
    opts: PscopfOptions = PscopfOptions(),
) -> Problem:
    """Base case plus one network copy per contingency, coupled through
    shared real-power recovery and PV/PQ switching rows.

    Switching for generator ``g`` in case ``k`` uses binaries ``b+``, ``b-``
    and ``D = |V_gk|^2 - |V_g0|^2``:

    * ``D + Mv*b- >= 0`` and ``D - Mv*b+ <= 0``
    * ``Im(S_gk) >= Qmax - Mq*(1 - b-)`` and ``Im(S_gk) <= Qmin + Mq*(1 - b+)``
    * ``b+ + b- <= 1``
    """
    if participation is None:
        participation = uniform_participation(net)
    _check_participation(net, participation)

    base = net
    base_tag = net.case_tag
    pb = assemble(base)
    if not contingencies:
        return pb

    seen = {base_tag}
    for c in contingencies:
        if c.id in seen:
            raise DuplicateName(f"case id {c.id!r} used twice")
        seen.add(c.id)

    base_gens = base.generators()
    for c in contingencies:
        cnet = apply_contingency(base, c)
        _merge(pb, assemble(cnet))
        present = {el.gen_id for _, el in cnet.generators()}
        delta = shortfall_variable(c.id)
        pb.register(delta)
        for bus, gen in base_gens:
            if gen.gen_id not in present:
                continue
            g = gen.gen_id
            s0 = Variable(generator_name(base_tag, g), Kind.COMPLEX)
            sk = Variable(generator_name(c.id, g), Kind.COMPLEX)
            alpha = participation[g]
            pb.add_equality(
                f"{c.id}/coupling/{g}",
                real_part(sk) - real_part(s0) - alpha * delta,
            )

            vmin, vmax = base.voltage_bounds(bus)
            big_v = opts.big_m_v if opts.big_m_v is not None else vmax**2 - vmin**2
            big_q = opts.big_m_q if opts.big_m_q is not None else gen.qmax - gen.qmin
            v0 = Variable(voltage_name(base_tag, bus), Kind.COMPLEX)
            vk = Variable(voltage_name(c.id, bus), Kind.COMPLEX)
            bplus, bminus = switching_binaries(c.id, g)
            d = abs2(vk) - abs2(v0)
            qk = imag_part(sk)
            prefix = f"{c.id}/pvpq/{g}"
            pb.add_constraint(f"{prefix}/vdrop", d + big_v * bminus, 0.0, None)
            pb.add_constraint(f"{prefix}/vrise", d - big_v * bplus, None, 0.0)
            pb.add_constraint(f"{prefix}/qmax", qk - big_q * bminus, gen.qmax - big_q, None)
            pb.add_constraint(f"{prefix}/qmin", qk + big_q * bplus, None, gen.qmin + big_q)
            pb.add_constraint(f"{prefix}/excl", bplus + bminus, None, 1.0)
    return pb
