"""Primal/dual output of the hop-bounded concurrent-flow solvers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from ..instance import InstanceError, Path, UnicastInstance, num_from_json, num_to_json

FEASIBLE = "feasible"
HOP_INFEASIBLE = "hop-infeasible"


@dataclass(frozen=True)
class PathFlow:
    session: int
    path: Path
    value: Fraction


@dataclass(frozen=True)
class Duals:
    """Edge lengths ℓ and session bounds h of the cut LP."""

    lengths: Mapping[int, Fraction]
    h: tuple[Fraction, ...]

    def value(self, instance: UnicastInstance, T: int) -> Fraction:
        """Objective T·Σ c_e ℓ_e."""
        return T * sum((e.capacity * self.lengths[eid] for eid, e in enumerate(instance.edges)), Fraction(0))

    def to_json(self) -> dict[str, Any]:
        return {
            "lengths": {str(eid): num_to_json(v) for eid, v in sorted(self.lengths.items())},
            "h": [num_to_json(x) for x in self.h],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> Duals:
        try:
            lengths = {int(k): num_from_json(v) for k, v in data["lengths"].items()}
            h = tuple(num_from_json(x) for x in data["h"])
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise InstanceError(f"malformed duals: {exc}") from exc
        return cls(lengths, h)


@dataclass(frozen=True)
class FlowSolution:
    z: Fraction
    T: int
    epsilon: Fraction
    flows: tuple[PathFlow, ...]
    duals: Duals
    status: str = FEASIBLE
    method: str = "mwu"
    infeasible_session: int | None = None

    def session_flow(self, i: int) -> Fraction:
        return sum((pf.value for pf in self.flows if pf.session == i), Fraction(0))

    def flows_of(self, i: int) -> list[PathFlow]:
        return [pf for pf in self.flows if pf.session == i]

    def edge_loads(self) -> dict[int, Fraction]:
        loads: dict[int, Fraction] = {}
        for pf in self.flows:
            for eid in pf.path.edges:
                loads[eid] = loads.get(eid, Fraction(0)) + pf.value
        return loads

    def dual_value(self, instance: UnicastInstance) -> Fraction:
        return self.duals.value(instance, self.T)

    def check(self, instance: UnicastInstance) -> list[str]:
        """Primal invariants: paths in P_i(T), per-session flow, edge budgets."""
        problems = []
        for pf in self.flows:
            s = instance.sessions[pf.session]
            if pf.path.source != s.source or pf.path.sink != s.sink:
                problems.append(f"flow path of session {pf.session} has wrong endpoints")
            if not pf.path.is_simple():
                problems.append(f"flow path of session {pf.session} is not simple")
            if pf.path.hops > self.T:
                problems.append(f"flow path of session {pf.session} exceeds {self.T} hops")
            if pf.value < 0:
                problems.append(f"negative flow on a path of session {pf.session}")
        for i, s in enumerate(instance.sessions):
            if s.source == s.sink:
                continue
            if self.session_flow(i) < (1 - self.epsilon) * self.z * s.demand:
                problems.append(f"session {i} carries less than (1-eps)·z·d_i")
        for eid, load in self.edge_loads().items():
            if load > self.T * instance.edges[eid].capacity:
                problems.append(f"edge {eid} load {load} exceeds T·c_e")
        return problems

    def to_json(self) -> dict[str, Any]:
        return {
            "z": num_to_json(self.z),
            "T": self.T,
            "epsilon": num_to_json(self.epsilon),
            "status": self.status,
            "method": self.method,
            "flows": [
                {
                    "session": pf.session,
                    "path": list(pf.path.nodes),
                    "edges": list(pf.path.edges),
                    "value": num_to_json(pf.value),
                }
                for pf in self.flows
            ],
            "dual": self.duals.to_json(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any], instance: UnicastInstance | None = None) -> FlowSolution:
        try:
            flows = []
            for rec in data["flows"]:
                nodes = tuple(str(x) for x in rec["path"])
                if "edges" in rec:
                    path = Path(nodes, tuple(int(e) for e in rec["edges"]))
                elif instance is not None:
                    path = instance.path_from_nodes(nodes)
                else:
                    raise InstanceError("flow path without edge ids needs the instance")
                flows.append(PathFlow(int(rec["session"]), path, num_from_json(rec["value"])))
            return cls(
                z=num_from_json(data["z"]),
                T=int(data["T"]),
                epsilon=num_from_json(data["epsilon"]),
                flows=tuple(flows),
                duals=Duals.from_json(data["dual"]),
                status=str(data.get("status", FEASIBLE)),
                method=str(data.get("method", "mwu")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceError(f"malformed flow solution: {exc}") from exc


def hop_infeasible_solution(
    instance: UnicastInstance, T: int, epsilon: Fraction, session: int, method: str
) -> FlowSolution:
    """z = 0 with the certificate ℓ = 0, h_session = 1/d_session: session has no ≤T-hop path,
    so its constraint set is empty and any h_i is dual feasible."""
    h = [Fraction(0)] * instance.k
    h[session] = Fraction(1, instance.sessions[session].demand)
    lengths = {eid: Fraction(0) for eid in range(len(instance.edges))}
    return FlowSolution(
        z=Fraction(0),
        T=T,
        epsilon=epsilon,
        flows=(),
        duals=Duals(lengths, tuple(h)),
        status=HOP_INFEASIBLE,
        method=method,
        infeasible_session=session,
    )
