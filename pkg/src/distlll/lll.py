"""LLL instances: independent finite variables, bad events over variable scopes,
dependency graphs, symmetric criteria and exact conditional probabilities.

Conditional probabilities come from a closed form when the event's predicate
provides one (conjunctions, counting thresholds, value multiplicities) and
from exhaustive enumeration of the unset scope otherwise.
"""

from __future__ import annotations

import bisect
import json
import math
from itertools import product
from typing import Callable, Iterable, Sequence

from .exceptions import CapacityError, IncompleteAssignmentError, ParameterError, ValidationError
from .graph import Graph, distance_k_coloring, power_graph

DEFAULT_ENUM_CAP = 1 << 20


class VariableSpec:
    """A random variable over ``0..domain_size-1``.

    ``dist`` is an explicit probability vector, or ``None`` for uniform. The
    uniform case never materializes the domain, so huge domains are fine.
    """

    __slots__ = ("id", "domain_size", "dist", "_cum", "_support")

    def __init__(self, id: int, domain_size: int, dist: Sequence[float] | None = None):
        if domain_size < 2:
            raise ParameterError("domain_size must be at least 2")
        self.id = int(id)
        self.domain_size = int(domain_size)
        self._cum = None
        self._support = None
        if dist is None:
            self.dist = None
            return
        dist = tuple(float(x) for x in dist)
        if len(dist) != domain_size:
            raise ParameterError("distribution length must equal domain_size")
        if any(x < 0 for x in dist) or abs(math.fsum(dist) - 1.0) > 1e-12:
            raise ParameterError("distribution must be nonnegative and sum to 1")
        self.dist = dist

    @property
    def uniform(self) -> bool:
        return self.dist is None

    def prob(self, value: int) -> float:
        if self.dist is None:
            return 1.0 / self.domain_size if 0 <= value < self.domain_size else 0.0
        return self.dist[value] if 0 <= value < self.domain_size else 0.0

    def prob_in(self, accept) -> float:
        """Probability that the variable lands in the value set ``accept``."""
        if self.dist is None:
            q = self.domain_size
            return sum(1 for a in accept if 0 <= a < q) / q
        return math.fsum(self.dist[a] for a in accept if 0 <= a < self.domain_size)

    def support(self):
        """Values with positive probability, ascending."""
        if self.dist is None:
            return range(self.domain_size)
        if self._support is None:
            self._support = tuple(i for i, x in enumerate(self.dist) if x > 0)
        return self._support

    def support_size(self) -> int:
        return self.domain_size if self.dist is None else len(self.support())

    def sample(self, stream) -> int:
        if self.dist is None:
            return stream.randbelow(self.domain_size)
        if self._cum is None:
            acc, cum = 0.0, []
            for x in self.dist:
                acc += x
                cum.append(acc)
            self._cum = cum
        u = stream.random() * self._cum[-1]
        i = bisect.bisect_right(self._cum, u)
        while self.dist[min(i, self.domain_size - 1)] == 0:
            i += 1  # never land on a zero-mass value at a float boundary
        return min(i, self.domain_size - 1)

    def to_dict(self) -> dict:
        out = {"id": self.id, "domain": self.domain_size}
        if self.dist is not None:
            out["dist"] = list(self.dist)
        return out

    def __repr__(self):
        kind = "uniform" if self.dist is None else "explicit"
        return f"VariableSpec(id={self.id}, domain_size={self.domain_size}, {kind})"


# --- probability helpers ------------------------------------------------------


def poisson_binomial_tail(probs: Sequence[float], k: int) -> float:
    """Pr[sum of independent Bernoulli(probs[i]) >= k], exact DP.

    >>> round(poisson_binomial_tail([0.5, 0.5], 1), 12)
    0.75
    >>> poisson_binomial_tail([0.3], 2)
    0.0
    """
    if k <= 0:
        return 1.0
    if k > len(probs):
        return 0.0
    # dp[j] = Pr[count == j] for j < k, dp[k] = Pr[count >= k]
    dp = [0.0] * (k + 1)
    dp[0] = 1.0
    for p in probs:
        if p <= 0.0:
            continue
        q = 1.0 - p
        dp[k] += dp[k - 1] * p
        for j in range(k - 1, 0, -1):
            dp[j] = dp[j] * q + dp[j - 1] * p
        dp[0] *= q
    return dp[k]


def _poly_mul(a, b, deg):
    out = [0.0] * (deg + 1)
    for i, x in enumerate(a):
        if x == 0.0:
            continue
        for j in range(min(len(b), deg + 1 - i)):
            out[i + j] += x * b[j]
    return out


def _poly_pow(a, e, deg):
    result = [1.0] + [0.0] * deg
    base = list(a[: deg + 1]) + [0.0] * max(0, deg + 1 - len(a))
    while e:
        if e & 1:
            result = _poly_mul(result, base, deg)
        e >>= 1
        if e:
            base = _poly_mul(base, base, deg)
    return result


def _no_multiplicity_prob(fixed_counts: dict, u: int, q: int, t: int) -> float:
    """Pr[no value reaches count t] when u more uniform draws over ``0..q-1``
    are added to the fixed counts (all fixed counts below t)."""
    # exponential generating functions in y = x / q
    def factor(limit):
        coeffs, c = [], 1.0
        for j in range(min(limit, u) + 1):
            coeffs.append(c)
            c /= (j + 1) * q
        return coeffs

    poly = [1.0] + [0.0] * u
    inside = 0
    for value, m in fixed_counts.items():
        if 0 <= value < q:
            inside += 1
            poly = _poly_mul(poly, factor(t - 1 - m), u)
    poly = _poly_mul(poly, _poly_pow(factor(t - 1), q - inside, u), u)
    return min(1.0, max(0.0, math.factorial(u) * poly[u]))


# --- predicates ---------------------------------------------------------------


class Predicate:
    """Boolean function of an event's scope values.

    Subclasses may offer ``cond_prob`` in closed form; returning ``None``
    tells the caller to enumerate.
    """

    kind = "callable"

    def evaluate(self, vals: Sequence[int]) -> bool:
        raise NotImplementedError

    def cond_prob(self, vals, specs):
        return None

    def surely(self, vals, specs):
        """True when the event occurs under every completion; None if unknown."""
        return None

    def params(self) -> dict | None:
        return None


class FunctionPredicate(Predicate):
    """Wraps an arbitrary callable; probabilities by enumeration only."""

    def __init__(self, fn: Callable[[Sequence[int]], bool], name: str = "callable"):
        self.fn = fn
        self.name = name

    def evaluate(self, vals):
        return bool(self.fn(vals))


class Conjunction(Predicate):
    """Occurs iff every scope variable equals its target value."""

    kind = "conjunction"

    def __init__(self, values: Sequence[int]):
        self.values = tuple(int(v) for v in values)

    def evaluate(self, vals):
        return all(a == b for a, b in zip(vals, self.values))

    def cond_prob(self, vals, specs):
        prob = 1.0
        for x, target, spec in zip(vals, self.values, specs):
            if x is None:
                prob *= spec.prob(target)
            elif x != target:
                return 0.0
        return prob

    def surely(self, vals, specs):
        return all(x == t for x, t in zip(vals, self.values))

    def params(self):
        return {"values": list(self.values)}


class Threshold(Predicate):
    """Counting event: at least ``t`` of the counted positions succeed.

    Position j succeeds when its value lies in ``accept[j]`` or, when a
    ``center`` position is given, when it equals the center's value. An
    optional ``gate = (position, value)`` must also hold for the event to
    occur. Center and gate positions are never counted.
    """

    kind = "threshold"

    def __init__(self, t: int, accept=None, center: int | None = None, gate=None, size: int | None = None):
        self.t = int(t)
        self.center = center
        self.gate = None if gate is None else (int(gate[0]), int(gate[1]))
        if accept is None:
            if center is None:
                raise ParameterError("threshold needs accept sets or a center")
            self.accept = None
        elif accept and isinstance(next(iter(accept)), (list, tuple, set, frozenset)):
            self.accept = tuple(frozenset(a) for a in accept)
        else:
            self.accept = frozenset(accept)
        self.size = size
        if isinstance(self.accept, tuple):
            self.size = len(self.accept)
        self._counted_cache = {}

    def _counted(self, n):
        c = self._counted_cache.get(n)
        if c is None:
            skip = {self.center, None if self.gate is None else self.gate[0]}
            c = tuple(j for j in range(n) if j not in skip)
            self._counted_cache[n] = c
        return c

    def _counted_acc(self, n):
        key = ("acc", n)
        c = self._counted_cache.get(key)
        if c is None:
            c = tuple((j, self._acc(j)) for j in self._counted(n))
            self._counted_cache[key] = c
        return c

    def _acc(self, j):
        return self.accept[j] if isinstance(self.accept, tuple) else self.accept

    def evaluate(self, vals):
        if self.gate is not None and vals[self.gate[0]] != self.gate[1]:
            return False
        counted = self._counted(len(vals))
        if self.center is not None:
            c = vals[self.center]
            hits = sum(1 for j in counted if vals[j] == c)
        else:
            hits = sum(1 for j in counted if vals[j] in self._acc(j))
        return hits >= self.t

    def cond_prob(self, vals, specs):
        factor = 1.0
        if self.gate is not None:
            gpos, gval = self.gate
            gx = vals[gpos]
            if gx is None:
                factor = specs[gpos].prob(gval)
            elif gx != gval:
                return 0.0
            if factor == 0.0:
                return 0.0
        counted = self._counted(len(vals))
        if self.center is None:
            hits, probs = 0, []
            for j in counted:
                x = vals[j]
                if x is None:
                    probs.append(specs[j].prob_in(self._acc(j)))
                elif x in self._acc(j):
                    hits += 1
            return factor * poisson_binomial_tail(probs, self.t - hits)
        c = vals[self.center]
        if c is not None:
            hits, probs = 0, []
            for j in counted:
                x = vals[j]
                if x is None:
                    probs.append(specs[j].prob(c))
                elif x == c:
                    hits += 1
            return factor * poisson_binomial_tail(probs, self.t - hits)
        return self._center_unset(vals, specs, counted, factor)

    def _center_unset(self, vals, specs, counted, factor):
        cspec = specs[self.center]
        unset = [j for j in counted if vals[j] is None]
        fixed = {}
        for j in counted:
            x = vals[j]
            if x is not None:
                fixed[x] = fixed.get(x, 0) + 1
        q = cspec.domain_size
        if cspec.uniform and all(specs[j].uniform and specs[j].domain_size == q for j in unset):
            # values not fixed anywhere behave identically, so group them
            same = [1.0 / q] * len(unset)
            inside = {x: m for x, m in fixed.items() if 0 <= x < q}
            total = math.fsum(poisson_binomial_tail(same, self.t - m) for m in inside.values())
            total += (q - len(inside)) * poisson_binomial_tail(same, self.t)
            return factor * total / q
        if cspec.support_size() <= 4096:
            total = 0.0
            for c in cspec.support():
                probs = [specs[j].prob(c) for j in unset]
                total += cspec.prob(c) * poisson_binomial_tail(probs, self.t - fixed.get(c, 0))
            return factor * total
        return None

    def surely(self, vals, specs):
        if self.gate is not None and vals[self.gate[0]] != self.gate[1]:
            return False
        counted = self._counted(len(vals))
        if self.center is not None:
            c = vals[self.center]
            if c is None:
                return None
            hits = sum(1 for j in counted if vals[j] == c)
        else:
            hits = 0
            t = self.t
            for j, acc in self._counted_acc(len(vals)):
                if vals[j] in acc:
                    hits += 1
                    if hits >= t:
                        return True
        return hits >= self.t

    def params(self):
        if self.accept is None:
            acc = None
        elif isinstance(self.accept, tuple):
            acc = [sorted(a) for a in self.accept]
        else:
            acc = sorted(self.accept)
        return {"t": self.t, "accept": acc, "center": self.center,
                "gate": None if self.gate is None else list(self.gate)}


class Multiplicity(Predicate):
    """Occurs iff some value appears at least ``t`` times in the scope.

    With ``t = 2`` on two variables this is the equality event of a
    monochromatic edge; with ``t = beta + 1`` on a neighborhood it is a
    frugality violation.
    """

    kind = "multiplicity"

    def __init__(self, t: int):
        if t < 1:
            raise ParameterError("multiplicity threshold must be at least 1")
        self.t = int(t)

    def evaluate(self, vals):
        counts = {}
        for x in vals:
            c = counts.get(x, 0) + 1
            if c >= self.t:
                return True
            counts[x] = c
        return False

    def cond_prob(self, vals, specs):
        fixed = {}
        unset = []
        for x, spec in zip(vals, specs):
            if x is None:
                unset.append(spec)
            else:
                fixed[x] = fixed.get(x, 0) + 1
        if fixed and max(fixed.values()) >= self.t:
            return 1.0
        u = len(unset)
        if u == 0:
            return 0.0
        if self.t == 1:
            return 1.0
        q = unset[0].domain_size
        if all(s.uniform and s.domain_size == q for s in unset):
            return 1.0 - _no_multiplicity_prob(fixed, u, q, self.t)
        if u == 1:
            s = unset[0]
            return math.fsum(s.prob(c) for c, m in fixed.items() if m == self.t - 1)
        return None

    def surely(self, vals, specs):
        counts = {}
        for x in vals:
            if x is not None:
                counts[x] = counts.get(x, 0) + 1
        return bool(counts) and max(counts.values()) >= self.t

    def params(self):
        return {"t": self.t}


class Table(Predicate):
    """Occurs iff the scope's value tuple is one of the listed tuples."""

    kind = "table"

    def __init__(self, accept: Iterable[Sequence[int]]):
        self.accept = frozenset(tuple(int(x) for x in row) for row in accept)

    def evaluate(self, vals):
        return tuple(vals) in self.accept

    def cond_prob(self, vals, specs):
        # sum over matching rows; exact and cheap for short tables
        total = 0.0
        for row in self.accept:
            prob = 1.0
            for x, r, spec in zip(vals, row, specs):
                if x is None:
                    prob *= spec.prob(r)
                elif x != r:
                    prob = 0.0
                    break
            total += prob
        return total

    def params(self):
        return {"accept": sorted(list(row) for row in self.accept)}


_PREDICATE_KINDS = {"conjunction", "threshold", "table", "multiplicity"}


def predicate_from_dict(kind: str, params: dict) -> Predicate:
    if kind == "conjunction":
        return Conjunction(params["values"])
    if kind == "threshold":
        return Threshold(params["t"], params.get("accept"), params.get("center"), params.get("gate"))
    if kind == "table":
        return Table(params["accept"])
    if kind == "multiplicity":
        return Multiplicity(params["t"])
    raise ValidationError(f"unknown predicate kind {kind!r}")


def enumerate_cond_prob(pred: Predicate, vals, specs, cap: int = DEFAULT_ENUM_CAP) -> float:
    """Exact conditional probability by summing over the unset positions' supports."""
    unset = [j for j, x in enumerate(vals) if x is None]
    size = 1
    for j in unset:
        size *= specs[j].support_size()
        if size > cap:
            raise CapacityError(f"enumeration over {size}+ outcomes exceeds cap {cap}")
    work = list(vals)
    total = 0.0
    supports = [specs[j].support() for j in unset]
    for combo in product(*supports):
        prob = 1.0
        for j, x in zip(unset, combo):
            work[j] = x
            prob *= specs[j].prob(x)
        if prob and pred.evaluate(work):
            total += prob
    return total


class EventSpec:
    """Bad event: a predicate over an ordered, duplicate-free variable scope."""

    __slots__ = ("id", "scope", "predicate")

    def __init__(self, id: int, scope: Sequence[int], predicate: Predicate):
        scope = tuple(int(x) for x in scope)
        if not scope:
            raise ValidationError(f"event {id} has an empty scope")
        if len(set(scope)) != len(scope):
            raise ValidationError(f"event {id} has duplicate scope variables")
        self.id = int(id)
        self.scope = scope
        self.predicate = predicate

    def to_dict(self) -> dict:
        params = self.predicate.params()
        if params is None or self.predicate.kind not in _PREDICATE_KINDS:
            raise ValidationError(f"event {self.id}: predicate {self.predicate.kind!r} is not serializable")
        return {"id": self.id, "scope": list(self.scope),
                "predicate": {"kind": self.predicate.kind, "params": params}}

    def __repr__(self):
        return f"EventSpec(id={self.id}, scope={self.scope}, kind={self.predicate.kind})"


class LLLInstance:
    """Variables plus events, with cached dependency structure.

    Variable and event ids must be dense and equal to their list positions.
    """

    def __init__(self, variables: Sequence[VariableSpec], events: Sequence[EventSpec],
                 enum_cap: int = DEFAULT_ENUM_CAP):
        self.variables = list(variables)
        self.events = list(events)
        self.enum_cap = enum_cap
        for i, v in enumerate(self.variables):
            if v.id != i:
                raise ValidationError(f"variable at position {i} has id {v.id}")
        nv = len(self.variables)
        var_events = [[] for _ in range(nv)]
        for i, ev in enumerate(self.events):
            if ev.id != i:
                raise ValidationError(f"event at position {i} has id {ev.id}")
            for x in ev.scope:
                if not 0 <= x < nv:
                    raise ValidationError(f"event {i} references unknown variable {x}")
                var_events[x].append(i)
        self.var_events = [tuple(lst) for lst in var_events]
        self._specs = [tuple(self.variables[x] for x in ev.scope) for ev in self.events]
        self._dep = None
        self._dep_sq = None
        self._sq_coloring = None
        self._probs = None

    @property
    def n_events(self) -> int:
        return len(self.events)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def scope_specs(self, eid: int):
        return self._specs[eid]

    # dependency structure -------------------------------------------------

    @property
    def dep_graph(self) -> Graph:
        if self._dep is None:
            adj = []
            ve = self.var_events
            for i, ev in enumerate(self.events):
                nb = set()
                for x in ev.scope:
                    nb.update(ve[x])
                nb.discard(i)
                adj.append(nb)
            self._dep = Graph._trusted(len(self.events), adj)
        return self._dep

    @property
    def dep_square(self) -> Graph:
        if self._dep_sq is None:
            self._dep_sq = power_graph(self.dep_graph, 2)
        return self._dep_sq

    @property
    def square_coloring(self) -> list[int]:
        if self._sq_coloring is None:
            self._sq_coloring = distance_k_coloring(self.dep_graph, 2)
        return self._sq_coloring

    @property
    def d(self) -> int:
        return self.dep_graph.max_degree

    def event_probs(self) -> list[float]:
        if self._probs is None:
            self._probs = [self.cond_prob_values(i, {}) for i in range(len(self.events))]
        return self._probs

    @property
    def p(self) -> float:
        return max(self.event_probs(), default=0.0)

    # evaluation -------------------------------------------------------------

    def scope_values(self, eid: int, values: dict) -> list:
        get = values.get
        return [get(x) for x in self.events[eid].scope]

    def cond_prob_values(self, eid: int, values: dict) -> float:
        ev = self.events[eid]
        vals = list(map(values.get, ev.scope))
        specs = self._specs[eid]
        if None not in vals:
            return 1.0 if ev.predicate.evaluate(vals) else 0.0
        prob = ev.predicate.cond_prob(vals, specs)
        if prob is None:
            prob = enumerate_cond_prob(ev.predicate, vals, specs, self.enum_cap)
        return min(1.0, max(0.0, prob))

    def surely_values(self, eid: int, values: dict) -> bool:
        """Whether the event occurs under every completion of ``values``."""
        ev = self.events[eid]
        vals = list(map(values.get, ev.scope))
        if None not in vals:
            return ev.predicate.evaluate(vals)
        s = ev.predicate.surely(vals, self._specs[eid])
        if s is None:
            return self.cond_prob_values(eid, values) >= 1.0 - 1e-12
        return s

    def occurs(self, eid: int, values: dict) -> bool:
        ev = self.events[eid]
        return ev.predicate.evaluate([values[x] for x in ev.scope])

    # serialization ------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"variables": [v.to_dict() for v in self.variables],
                "events": [e.to_dict() for e in self.events]}

    @classmethod
    def from_dict(cls, data: dict) -> "LLLInstance":
        try:
            variables = [VariableSpec(v["id"], v["domain"], v.get("dist")) for v in data["variables"]]
            events = []
            for e in data["events"]:
                pred = e["predicate"]
                events.append(EventSpec(e["id"], e["scope"], predicate_from_dict(pred["kind"], pred.get("params", {}))))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed instance: {exc}") from exc
        variables.sort(key=lambda v: v.id)
        events.sort(key=lambda e: e.id)
        return cls(variables, events)

    def __repr__(self):
        return f"LLLInstance(vars={self.n_vars}, events={self.n_events})"


def load_instance(path) -> LLLInstance:
    with open(path) as fh:
        return LLLInstance.from_dict(json.load(fh))


def dump_instance(inst: LLLInstance, path) -> None:
    with open(path, "w") as fh:
        json.dump(inst.to_dict(), fh)


class PartialAssignment:
    """Values for some variables plus a set of frozen (deliberately unset) ones."""

    __slots__ = ("values", "frozen")

    def __init__(self, values: dict | None = None, frozen: Iterable[int] | None = None):
        self.values = dict(values or {})
        self.frozen = set(frozen or ())
        if self.frozen & self.values.keys():
            raise ValidationError("a variable cannot be both set and frozen")

    def assign(self, var: int, value: int) -> None:
        if var in self.frozen:
            raise ValidationError(f"variable {var} is frozen")
        self.values[var] = value

    def unset(self, var: int) -> None:
        self.values.pop(var, None)

    def freeze(self, var: int) -> None:
        if var in self.values:
            raise ValidationError(f"variable {var} is set and cannot be frozen")
        self.frozen.add(var)

    def is_set(self, var: int) -> bool:
        return var in self.values

    def copy(self) -> "PartialAssignment":
        return PartialAssignment(self.values, self.frozen)

    def is_complete(self, n_vars: int) -> bool:
        return len(self.values) == n_vars

    def as_list(self, n_vars: int) -> list[int]:
        missing = [x for x in range(n_vars) if x not in self.values]
        if missing:
            raise IncompleteAssignmentError(f"{len(missing)} variables unset, first {missing[0]}")
        return [self.values[x] for x in range(n_vars)]

    def __eq__(self, other):
        return isinstance(other, PartialAssignment) and self.values == other.values and self.frozen == other.frozen

    def __repr__(self):
        return f"PartialAssignment(set={len(self.values)}, frozen={len(self.frozen)})"


# --- operations ------------------------------------------------------------------


def dependency_graph(inst: LLLInstance) -> Graph:
    return inst.dep_graph


def check_criterion(p: float, d: int, form: str = "epd", lam: float | None = None) -> bool:
    """Symmetric LLL criteria: ``e*p*d <= 1`` or ``p*(e*d)**lam < 1``.

    ``d`` is replaced by ``max(d, 1)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    if d < 0:
        raise ParameterError("d must be nonnegative")
    d = max(d, 1)
    if form == "epd":
        return math.e * p * d <= 1.0
    if form == "poly":
        if lam is None or lam < 1:
            raise ParameterError("poly form needs lam >= 1")
        if p == 0.0:
            return True
        return math.log(p) + lam * math.log(math.e * d) < 0.0
    raise ParameterError(f"unknown criterion form {form!r}")


def cond_prob(ev, pa: PartialAssignment | dict, inst: LLLInstance) -> float:
    eid = ev.id if isinstance(ev, EventSpec) else int(ev)
    values = pa.values if isinstance(pa, PartialAssignment) else pa
    return inst.cond_prob_values(eid, values)


def violated_events(inst: LLLInstance, pa: PartialAssignment | dict) -> set[int]:
    values = pa.values if isinstance(pa, PartialAssignment) else pa
    if len(values) < inst.n_vars or any(x not in values for x in range(inst.n_vars)):
        missing = next(x for x in range(inst.n_vars) if x not in values)
        raise IncompleteAssignmentError(f"variable {missing} is unset")
    return {i for i in range(inst.n_events) if inst.occurs(i, values)}


def max_cond_prob(inst: LLLInstance, pa: PartialAssignment | dict, events: Iterable[int] | None = None) -> float:
    values = pa.values if isinstance(pa, PartialAssignment) else pa
    ids = range(inst.n_events) if events is None else events
    return max((inst.cond_prob_values(i, values) for i in ids), default=0.0)
