"""Relational operators as MapReduce jobs: hash join, chained multi-way
join, duplicate elimination, and anti-join, plus whole-rule evaluation.

Records flowing through operator jobs have the shape ``(tag, cols)``
where ``tag`` names the record's origin and ``cols`` is an encoded tuple.
Map functions re-key records by the join or anti-join columns; join reduce
functions cross-product the two tag groups of a key, anti-join reduce
functions emit the positive group only when no negative tag is present (the
whole group is scanned first, so value order never matters), and duplicate
elimination keys each record by itself and emits it once.

Rule evaluation chains these jobs: joins over the positive subgoals (each
followed by duplicate elimination), one anti-join per negative subgoal, and
a final projection onto the head arguments.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Optional, Sequence

from .mapreduce import Engine, JobSpec, Record
from .planner import RulePlan, SubgoalAccess
from .store import FactSource, SymbolTable

__all__ = [
    "single_join",
    "multi_join",
    "dedup",
    "anti_join",
    "eval_rule",
    "rule_pipeline",
]

_NEG = "neg"  # bare tag for negative-side records in an anti-join


# ---------------------------------------------------------------------------
# Input streams
# ---------------------------------------------------------------------------


def _access_stream(
    source: FactSource,
    access: SubgoalAccess,
    tag: str,
    cols: Optional[Sequence[int]] = None,
) -> Iterator[Record]:
    """Stream a subgoal's relation with its selection filters and variable
    projection applied map-side.

    ``cols`` overrides the projected atom columns (defaults to the first
    occurrence of each distinct variable, i.e. the access variable layout).
    """
    tuples = source.tuples(access.atom.predicate)
    out_cols = tuple(cols) if cols is not None else tuple(c for _, c in access.var_cols)
    if (
        not access.eq_cols
        and not access.const_cols
        and out_cols == tuple(range(access.atom.arity))
    ):
        for row in tuples:
            yield (tag, row)
        return
    const_cols = []
    for col, symbol in access.const_cols:
        sid = source.symbols.lookup(symbol)
        if sid is None:  # constant never interned: nothing can match
            return
        const_cols.append((col, sid))
    eq_cols = access.eq_cols
    for row in tuples:
        if any(row[c] != sid for c, sid in const_cols):
            continue
        if any(row[a] != row[b] for a, b in eq_cols):
            continue
        yield (tag, tuple(row[c] for c in out_cols))


def _tagged(rows: Iterable[tuple[int, ...]], tag: str) -> Iterator[Record]:
    for row in rows:
        yield (tag, row)


# ---------------------------------------------------------------------------
# Job builders
# ---------------------------------------------------------------------------


def _join_spec(
    name: str,
    left_tag: str,
    right_tag: str,
    left_key: Sequence[int],
    right_key: Sequence[int],
    out_cols: Sequence[tuple[str, int]],
    out_tag: str,
    inputs: Sequence[Iterable[Record]] = (),
) -> JobSpec:
    lkey = tuple(left_key)
    rkey = tuple(right_key)
    selectors = tuple((side == "l", idx) for side, idx in out_cols)
    warnings = ("empty join key: all records meet in one reduce group",) if not lkey else ()

    def mapper(record: Record) -> list:
        tag, cols = record
        if tag == left_tag:
            return [(tuple(cols[i] for i in lkey), record)]
        if tag == right_tag:
            return [(tuple(cols[i] for i in rkey), record)]
        raise ValueError(f"unexpected record tag {tag!r}")

    def reducer(key, values) -> list:
        lefts = []
        rights = []
        for tag, cols in values:
            if tag == left_tag:
                lefts.append(cols)
            else:
                rights.append(cols)
        if not lefts or not rights:
            return []
        out = []
        seen = set()  # duplicates are pruned inside the group before emission
        for lcols in lefts:
            for rcols in rights:
                row = tuple(lcols[i] if left else rcols[i] for left, i in selectors)
                if row not in seen:
                    seen.add(row)
                    out.append((out_tag, row))
        return out

    return JobSpec(name=name, mapper=mapper, reducer=reducer, inputs=list(inputs), warnings=warnings)


def _dedup_spec(
    name: str,
    out_tag: Optional[str] = None,
    project: Optional[Sequence[int]] = None,
    inputs: Sequence[Iterable[Record]] = (),
) -> JobSpec:
    """Record-as-key duplicate elimination, optionally projecting columns
    and renaming the origin tag."""
    cols_sel = tuple(project) if project is not None else None

    if cols_sel is None and out_tag is None:

        def mapper(record: Record) -> list:
            return [(record, "")]

    else:

        def mapper(record: Record) -> list:
            cols = record[1]
            if cols_sel is not None:
                cols = tuple(cols[i] for i in cols_sel)
            return [((out_tag if out_tag is not None else record[0], cols), "")]

    def reducer(key, values) -> list:
        return [key]

    return JobSpec(name=name, mapper=mapper, reducer=reducer, inputs=list(inputs))


def _head_spec(
    name: str,
    plan: RulePlan,
    symbols: SymbolTable,
    inputs: Sequence[Iterable[Record]] = (),
) -> JobSpec:
    extract = tuple(
        (True, idx) if kind == "v" else (False, symbols.intern(idx))
        for kind, idx in plan.head_cols
    )
    out_tag = "head"

    def mapper(record: Record) -> list:
        cols = record[1]
        row = tuple(cols[i] if is_var else i for is_var, i in extract)
        return [((out_tag, row), "")]

    def reducer(key, values) -> list:
        return [key]

    return JobSpec(name=name, mapper=mapper, reducer=reducer, inputs=list(inputs))


def _antijoin_spec(
    name: str,
    pos_tag: str,
    pos_key: Sequence[int],
    neg_records: Iterable[Record],
    neg_tag: str = _NEG,
) -> JobSpec:
    pkey = tuple(pos_key)
    warnings = ("empty anti-join key: ground negative subgoal",) if not pkey else ()

    def mapper(record: Record) -> list:
        tag, cols = record
        if tag == neg_tag:
            return [(cols, _NEG)]
        return [(tuple(cols[i] for i in pkey), record)]

    def reducer(key, values) -> list:
        kept = []
        for value in values:
            if value is _NEG or value == _NEG:
                return []  # a negative match kills the whole group
            kept.append(value)
        return kept

    return JobSpec(name=name, mapper=mapper, reducer=reducer, inputs=[neg_records], warnings=warnings)


# ---------------------------------------------------------------------------
# Public operators
# ---------------------------------------------------------------------------


def single_join(
    engine: Engine,
    left: Iterable[tuple[int, ...]],
    right: Iterable[tuple[int, ...]],
    left_key: Sequence[int],
    right_key: Sequence[int],
    out_cols: Sequence[tuple[str, int]],
    name: str = "join",
) -> set[tuple[int, ...]]:
    """Hash-join two tuple streams on the given key columns.

    ``out_cols`` selects output columns as ("l", i) or ("r", i) pairs.
    """
    spec = _join_spec(name, "L", "R", left_key, right_key, out_cols, "out")
    spec.inputs = [_tagged(left, "L"), _tagged(right, "R")]
    output, _ = engine.run_job(spec)
    return {cols for _, cols in output}


def dedup(
    engine: Engine, rows: Iterable[tuple[int, ...]], name: str = "dedup"
) -> set[tuple[int, ...]]:
    """Duplicate elimination as a job: each record becomes its own key."""
    spec = _dedup_spec(name, inputs=[_tagged(rows, "out")])
    output, _ = engine.run_job(spec)
    return {cols for _, cols in output}


def anti_join(
    engine: Engine,
    positive: Iterable[tuple[int, ...]],
    negative: Iterable[tuple[int, ...]],
    key: Sequence[int],
    name: str = "antijoin",
) -> set[tuple[int, ...]]:
    """Keep positive tuples whose key columns match no negative tuple.

    ``negative`` holds bare key tuples (safety guarantees the key covers
    every column of the negative relation).
    """
    spec = _antijoin_spec(name, "P", key, _tagged(negative, _NEG))
    spec.inputs = list(spec.inputs) + [_tagged(positive, "P")]
    output, _ = engine.run_job(spec)
    return {cols for _, cols in output}


def _goal_pipeline(
    plan: RulePlan,
    pos: FactSource,
    delta: Optional[FactSource] = None,
    delta_at: Optional[int] = None,
) -> tuple[list[JobSpec], Optional[list[Record]]]:
    """Jobs computing the positive goal; returns (specs, seed records).

    With ``delta``/``delta_at`` the positive subgoal at that index streams
    from the delta source instead of ``pos`` (semi-naive evaluation).
    """
    name = plan.head_predicate

    def source_for(index: int) -> FactSource:
        if delta is not None and index == delta_at:
            return delta
        return pos

    if plan.base is None:
        # no positive subgoals: the goal is the unit relation
        return [], [("goal", ())]

    goal_project = plan.goal_cols
    if goal_project == tuple(range(len(goal_project))):
        goal_project = None  # identity projection: key records as they are

    specs: list[JobSpec] = []
    base_stream = _access_stream(source_for(0), plan.base, "s0", cols=plan.base_cols)
    if not plan.joins:
        specs.append(
            _dedup_spec(f"{name}:goal", "goal", project=goal_project, inputs=[base_stream])
        )
        return specs, None

    left_tag = "s0"
    pending = [base_stream]
    last = len(plan.joins) - 1
    for i, step in enumerate(plan.joins):
        right_tag = f"r{i + 1}"
        join_out = f"j{i + 1}"
        spec = _join_spec(
            f"{name}:join{i + 1}",
            left_tag,
            right_tag,
            step.left_key,
            step.right_key,
            step.out_cols,
            join_out,
        )
        spec.inputs = pending + [_access_stream(source_for(i + 1), step.right, right_tag)]
        specs.append(spec)
        pending = []
        if i == last:
            specs.append(_dedup_spec(f"{name}:goal", "goal", project=goal_project))
            left_tag = "goal"
        else:
            specs.append(_dedup_spec(f"{name}:dedup{i + 1}"))
            left_tag = join_out
    return specs, None


def rule_pipeline(
    plan: RulePlan,
    pos: FactSource,
    neg: FactSource,
    delta: Optional[FactSource] = None,
    delta_at: Optional[int] = None,
) -> tuple[list[JobSpec], Optional[list[Record]]]:
    """The full job pipeline for one rule: positive goal, anti-joins, head."""
    name = plan.head_predicate
    specs, seed = _goal_pipeline(plan, pos, delta, delta_at)
    for j, step in enumerate(plan.anti_joins):
        specs.append(
            _antijoin_spec(
                f"{name}:antijoin{j + 1}",
                "goal",
                step.pos_key,
                _access_stream(neg, step.access, _NEG),
            )
        )
    specs.append(_head_spec(f"{name}:head", plan, pos.symbols))
    return specs, seed


def multi_join(engine: Engine, plan: RulePlan, pos: FactSource) -> set[tuple[int, ...]]:
    """Compute the positive goal: the natural join of all positive subgoals
    projected onto the goal schema, with duplicate elimination per stage."""
    specs, seed = _goal_pipeline(plan, pos)
    output, _ = engine.run_pipeline(specs, inputs=seed)
    return {cols for _, cols in output}


def eval_rule(
    engine: Engine,
    plan: RulePlan,
    pos: FactSource,
    neg: FactSource,
    delta: Optional[FactSource] = None,
    delta_at: Optional[int] = None,
) -> set[tuple[int, ...]]:
    """Head tuples derivable from the rule with positive subgoals matched in
    ``pos`` and negative subgoals absent from ``neg``."""
    specs, seed = rule_pipeline(plan, pos, neg, delta, delta_at)
    output, _ = engine.run_pipeline(specs, inputs=seed)
    return {cols for _, cols in output}
