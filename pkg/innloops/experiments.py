"""
Seeded experiments over the named loops and the C(H, mu) family.

Every experiment expands its spec into a list of work items in the parent
process (all random draws happen there, from one PCG64 stream), evaluates
the items on a joblib pool and collects the results in input order. Reports
carry the tool version, the spec and the seed but no wall-clock data, so a
rerun with the same spec writes the same bytes.
"""

from typing import Any, Callable, Dict, List, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from . import __version__
from .extensions import build_C, build_Cbar, build_theta_t
from .greedy_search import greedy_minimize
from .iso import are_isomorphic, canonical_fingerprint, isomorphism_classes
from .loop_core import analyze, center, mu_count, nilpotency_class, nuclei
from .modification import (TrilinearForm, build_CHmu, group64, squaring_vector,
                           suitable_group_census)
from .perm_group import (inner_mapping_group, is_abelian, is_elementary_abelian_2,
                         multiplication_group)
from .shared.errors import InvalidSpec
from .shared.logging_config import LoggerMixin
from .shared.models import (DELTA_PARAM_COUNT, DeltaMuParams, ExperimentName, ExperimentReport,
                            ExperimentSpec, LoopCategory)
from .shared.settings import get_settings
from .shared.store import LoopStore, write_json

THETA_COUNT = 128
MLT_TRIVIAL_ORDER = 2 ** 13
MLT_SPECIAL_ORDER = 2 ** 16
PRNG_NAME = "PCG64"

WorkItem = Tuple[Callable[..., Dict[str, Any]], Tuple[Any, ...]]


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# Work items; top-level so the pool can pickle them

def theta_item(t: int) -> Dict[str, Any]:
    Q = build_theta_t(t)
    count = mu_count(Q)
    nil = nilpotency_class(Q)
    inn_abelian = None
    if count and nil == 3:
        inn_abelian = is_abelian(inner_mapping_group(Q))
    if count == 0:
        category = LoopCategory.GROUP
    elif inn_abelian:
        category = LoopCategory.CLASS3_ABELIAN_INN
    else:
        category = LoopCategory.OTHER
    return dict(t=t, mu_count=count, nilpotency_class=nil, inn_abelian=inn_abelian,
                category=category.value, digest=canonical_fingerprint(Q))


def chmu_item(code: int, delta: int, mu: int, mlt: bool = False) -> Dict[str, Any]:
    params = DeltaMuParams.from_ints(delta, mu)
    Q = build_CHmu(group64(squaring_vector(code)), TrilinearForm.determinant(), params)
    Z = center(Q)
    M = multiplication_group(Q)
    inn = inner_mapping_group(Q, mlt=M)
    item = dict(squaring_code=code, delta=params.delta_hex, mu=params.mu_hex, order=Q.n,
                center_size=Z.size, center_is_a=Z.elements.tolist() == [0, 1],
                nilpotency_class=nilpotency_class(Q), inn_order=inn.order,
                inn_abelian=is_abelian(inn), inn_elementary_abelian_2=is_elementary_abelian_2(inn),
                digest=canonical_fingerprint(Q))
    if mlt:
        item["mlt_order"] = M.order
    return item


def mlt_item(code: int, delta: int, mu: int) -> Dict[str, Any]:
    params = DeltaMuParams.from_ints(delta, mu)
    Q = build_CHmu(group64(squaring_vector(code)), TrilinearForm.determinant(), params)
    return dict(squaring_code=code, delta=params.delta_hex, mu=params.mu_hex,
                mlt_order=multiplication_group(Q).order)


def pair_item(code: int, first: Tuple[int, int], second: Tuple[int, int]) -> Dict[str, Any]:
    H = group64(squaring_vector(code))
    f = TrilinearForm.determinant()
    p1, p2 = DeltaMuParams.from_ints(*first), DeltaMuParams.from_ints(*second)
    Q1, Q2 = build_CHmu(H, f, p1), build_CHmu(H, f, p2)
    return dict(first=[p1.delta_hex, p1.mu_hex], second=[p2.delta_hex, p2.mu_hex],
                isomorphic=are_isomorphic(Q1, Q2) is not None)


def greedy_item(workers: int = 1) -> Dict[str, Any]:
    C = build_C()
    final, history = greedy_minimize(C, nuclei(C)[3], h="auto", workers=workers)
    report = analyze(final, mlt=True)
    return dict(history=history.model_dump(mode="json"),
                analysis=report.model_dump(mode="json"),
                isomorphic_to_c=are_isomorphic(final, C) is not None,
                isomorphic_to_cbar=are_isomorphic(final, build_Cbar()) is not None)


def census_item(workers: int = 1) -> Dict[str, Any]:
    manifest = suitable_group_census(workers=workers,
                                     store=LoopStore(get_settings().cache_dir))
    return manifest.model_dump(mode="json")


# Runner

class ExperimentRunner(LoggerMixin):
    """Expands a spec into work items, runs them, and summarizes."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self.rng = make_rng(spec.seed)

    def _random_params(self) -> DeltaMuParams:
        return DeltaMuParams.random(self.rng)

    def plan(self) -> List[WorkItem]:
        spec = self.spec
        name = spec.name
        if name == ExperimentName.THETA_FAMILY:
            return [(theta_item, (t,)) for t in range(THETA_COUNT)]
        if name == ExperimentName.SINGLE_DELTA_PARAMS:
            return [(chmu_item, (0, 1 << k, 0)) for k in range(DELTA_PARAM_COUNT)]
        if name == ExperimentName.RANDOM_MU_PAIRS:
            items = []
            for _ in range(spec.pairs):
                p1, p2 = self._random_params(), self._random_params()
                items.append((pair_item, (0, (p1.delta_int, p1.mu_int),
                                          (p2.delta_int, p2.mu_int))))
            return items
        if name == ExperimentName.GREEDY_DESCENT:
            return [(greedy_item, (spec.workers,))]
        if name == ExperimentName.GROUPS64_CENSUS:
            return [(census_item, (spec.workers,))]
        if name == ExperimentName.MLT_ORDERS:
            manifest = suitable_group_census(workers=spec.workers)
            codes = [entry.representative for entry in manifest.classes]
            items = []
            for code in codes:
                items.append((mlt_item, (code, 0, 0)))
                items.append((mlt_item, (code, 0, 1)))
            for _ in range(spec.samples):
                p = self._random_params()
                items.append((mlt_item, (codes[0], p.delta_int, p.mu_int)))
            return items
        if name == ExperimentName.CHMU_PROPERTIES:
            manifest = suitable_group_census(workers=spec.workers)
            codes = [entry.representative for entry in manifest.classes]
            items = []
            for k in range(spec.samples):
                p = self._random_params()
                items.append((chmu_item, (codes[k % len(codes)], p.delta_int, p.mu_int)))
            return items
        raise InvalidSpec(f"unknown experiment {name!r}")

    def execute(self, plan: List[WorkItem]) -> Tuple[List[Dict[str, Any]], bool]:
        """Run the plan; returns the finished items and whether all of them finished."""
        items: List[Dict[str, Any]] = []
        workers = 1 if len(plan) == 1 else self.spec.workers
        try:
            if workers > 1:
                results = Parallel(n_jobs=workers, return_as="generator")(
                    delayed(func)(*args) for func, args in plan)
            else:
                results = (func(*args) for func, args in plan)
            for result in results:
                items.append(result)
        except KeyboardInterrupt:
            self.logger.warning("Experiment interrupted", finished=len(items), planned=len(plan))
            return items, False
        return items, True

    def summarize(self, items: List[Dict[str, Any]]) -> Dict[str, Any]:
        name = self.spec.name
        if name == ExperimentName.THETA_FAMILY:
            return self._summarize_theta(items)
        if name == ExperimentName.SINGLE_DELTA_PARAMS:
            return self._summarize_single_delta(items)
        if name == ExperimentName.RANDOM_MU_PAIRS:
            return dict(pairs=len(items), isomorphic_pairs=sum(i["isomorphic"] for i in items))
        if name == ExperimentName.GREEDY_DESCENT:
            item = items[0]
            return dict(steps=len(item["history"]["steps"]),
                        final_mu_count=item["history"]["final_mu_count"],
                        isomorphic_to_c=item["isomorphic_to_c"],
                        isomorphic_to_cbar=item["isomorphic_to_cbar"])
        if name == ExperimentName.GROUPS64_CENSUS:
            return dict(classes=len(items[0]["classes"]), total=items[0]["total"])
        if name == ExperimentName.MLT_ORDERS:
            return self._summarize_mlt(items)
        if name == ExperimentName.CHMU_PROPERTIES:
            checks = ("center_is_a", "inn_elementary_abelian_2")
            failures = [i for i in items if not all(i[c] for c in checks)
                        or i["order"] != 128 or i["nilpotency_class"] != 3]
            return dict(samples=len(items), failures=len(failures))
        return {}

    def _summarize_theta(self, items: List[Dict[str, Any]]) -> Dict[str, Any]:
        by_category: Dict[str, List[int]] = {c.value: [] for c in LoopCategory}
        for item in items:
            by_category[item["category"]].append(item["t"])
        summary: Dict[str, Any] = dict(categories=by_category)
        groups = by_category[LoopCategory.GROUP.value]
        if groups:
            first = build_theta_t(groups[0])
            summary["groups_isomorphic"] = all(
                are_isomorphic(first, build_theta_t(t)) is not None for t in groups[1:])
        special = by_category[LoopCategory.CLASS3_ABELIAN_INN.value]
        if special:
            cbar = build_Cbar()
            summary["class3_isomorphic_to_cbar"] = all(
                are_isomorphic(cbar, build_theta_t(t)) is not None for t in special)
        return summary

    def _summarize_single_delta(self, items: List[Dict[str, Any]]) -> Dict[str, Any]:
        tables = [build_CHmu(group64((0, 0, 0)), TrilinearForm.determinant(),
                             DeltaMuParams.from_hex(i["delta"], i["mu"])) for i in items]
        classes, _ = isomorphism_classes(tables, digests=[i["digest"] for i in items])
        return dict(loops=len(items), classes=classes,
                    pairwise_nonisomorphic=len(classes) == len(items))

    def _summarize_mlt(self, items: List[Dict[str, Any]]) -> Dict[str, Any]:
        fixed = items[:len(items) - self.spec.samples]
        trivial = [i["mlt_order"] for i in fixed if i["mu"] == "00"]
        special = [i["mlt_order"] for i in fixed if i["mu"] == "01"]
        sampled = [i["mlt_order"] for i in items[len(fixed):]]
        return dict(trivial_mu_orders=trivial, single_mu_orders=special,
                    sampled_orders=sorted(set(sampled)),
                    found_order_2_16=MLT_SPECIAL_ORDER in sampled,
                    min_order_at_least_2_13=min(i["mlt_order"] for i in items) >= MLT_TRIVIAL_ORDER)

    def run(self) -> ExperimentReport:
        spec = self.spec
        self.logger.info("Experiment started", name=spec.name.value, seed=spec.seed,
                         workers=spec.workers)
        plan = self.plan()
        items, complete = self.execute(plan)
        summary = self.summarize(items) if complete else {}
        report = ExperimentReport(tool_version=__version__, prng=PRNG_NAME, seed=spec.seed,
                                  spec=spec, complete=complete, items=items, summary=summary)
        self.write(report)
        self.logger.info("Experiment finished", name=spec.name.value, items=len(items),
                         complete=complete)
        return report

    def write(self, report: ExperimentReport) -> None:
        if self.spec.output is not None:
            write_json(self.spec.output, report.model_dump(mode="json"))
        if self.spec.summary_csv is not None and report.items:
            frame = pd.json_normalize(report.items, max_level=1)
            self.spec.summary_csv.parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(self.spec.summary_csv, index=False)


def run_experiment(spec: ExperimentSpec) -> ExperimentReport:
    return ExperimentRunner(spec).run()
