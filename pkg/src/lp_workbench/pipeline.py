"""Task execution: dispatch spec-file tasks to the library and collect a report."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import DEFAULT_SEED, MAX_TASK_WORKERS
from .crossed_product import (
    action_from_group_action,
    check_crossed_expectation,
    compare_with_transformation_groupoid,
    crossed_product_algebra,
    isometric_action,
    trivial_algebra_action,
    verify_core_theorem,
    verify_tensor_compatibility,
)
from .errors import GuardExceeded, InvalidInputError, VerificationError, WorkbenchError
from .exact import ExactMatrix, linear_combination, same_span, to_scalar
from .groupoid import (
    check_bisection_homomorphism,
    coe_search,
    count_bisections,
    enumerate_bisections,
    find_isomorphism,
    is_principal,
    isotropy_bundle,
    transformation_groupoid,
    verify_coe,
)
from .groupoid_algebra import (
    check_conditional_expectation,
    check_jconv,
    check_move_delta,
    check_multiplicativity,
    check_multiplier_contraction,
    core_of_groupoid_algebra,
    i_norm,
    lambda_norm,
    random_element,
    sup_norm,
)
from .leavitt import (
    TruncatedModel,
    absorption_generators,
    check_confluence,
    check_cuntz_relations,
    covariant_images,
    monomials_independent,
    mutated_covariant_images,
    product_agrees_in_model,
    random_leavitt_element,
    truncated_spatial_representation,
    verify_covariant_presentation,
    verify_matrix_absorption,
)
from .lp_norms import (
    PExponent,
    core_of,
    diagonal_algebra,
    hermitian_basis,
    is_hermitian,
    is_lamperti_isometry,
    lamperti_decompose,
    random_lamperti,
    random_non_lamperti,
)
from .report import Report, TaskResult
from .specfile import SpecFile, TaskSpec, matrices_by_element
from .utils import banner, fmt_float, fmt_label, log, plural, stopwatch
from .weyl import bisection_round_trip, random_pair_soundness, realizable_maps, reconstruct_weyl

Outcome = Tuple[str, Dict[str, object]]

CLAIMS = {
    "validate": "groupoid axioms hold and bisections act by an inverse-semigroup homomorphism",
    "core": "the C*-core of F^p_lambda(G) is C(G^(0)) for p != 2",
    "weyl": "the Weyl groupoid of (F^p_lambda(G), C(G^(0))) is isomorphic to G when G is principal",
    "coe": (
        "free actions are continuously orbit equivalent iff their transformation groupoids"
        " are isomorphic"
    ),
    "norms": "||f||_inf <= ||f||_lambda <= ||f||_I, with equality on the unit space",
    "crossed": "the C*-core of F^p_lambda(G, A) is the C*-core of A",
    "leavitt": "generator-level identities in matrices over the Leavitt algebra hold exactly",
    "hermitian": "for p != 2 the hermitian elements are the real diagonal operators",
    "lamperti": "isometries of l^p_n for p != 2 are unimodular diagonal times permutation",
}


def _default_p(task: TaskSpec, *fallback) -> Tuple[PExponent, ...]:
    return task.p_values or tuple(PExponent.parse(p) for p in fallback)


def _worst(statuses: List[str]) -> str:
    for status in ("fail", "inconclusive-guard", "inconclusive-interval"):
        if status in statuses:
            return status
    return "pass"


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _run_validate(task: TaskSpec, rng) -> Outcome:
    tol = task.tolerances
    samples = int(task.params.get("samples", 0))
    entries = []
    for G in task.params.get("groupoids", []):
        bisections = enumerate_bisections(G, tol.max_bisections)
        entry = {
            "object": G.name,
            "arrows": len(G.arrows),
            "units": len(G.units),
            "principal": is_principal(G),
            "isotropy_arrows": len(isotropy_bundle(G)),
            "bisections": count_bisections(G),
        }
        entry.update(check_bisection_homomorphism(G, bisections, rng))
        for _ in range(samples):
            a = random_element(G, rng)
            b = random_element(G, rng)
            f = random_element(G, rng, units_only=True)
            g = random_element(G, rng, units_only=True)
            check_multiplicativity(a, b)
            check_jconv(a, b)
            check_move_delta(a)
            check_conditional_expectation(a, f, g)
        entry["identity_samples"] = samples
        entries.append(entry)
    for A in task.params.get("actions", []):
        entries.append({
            "object": A.name,
            "points": len(A.space),
            "group_order": A.group.order,
            "orbits": [[fmt_label(x) for x in orbit] for orbit in A.orbits],
            "free": A.is_free(),
        })
    return "pass", {"objects": entries}


def _expected_core(kind: str, A) -> List[ExactMatrix]:
    if kind == "diagonal":
        return list(diagonal_algebra(A.n).basis)
    if kind == "all":
        return list(A.basis)
    if kind == "scalars":
        return [ExactMatrix.identity(A.n)]
    raise InvalidInputError(f"unknown core expectation '{kind}' (diagonal, all, scalars)")


def _run_core(task: TaskSpec, rng) -> Outcome:
    entries = []
    statuses = []
    expect = task.params.get("expect")
    for p in _default_p(task, 3):
        for G in task.params.get("groupoids", []):
            core = core_of_groupoid_algebra(G, p)
            entries.append({
                "object": G.name,
                "p": p.label,
                "core_dimension": core.dimension,
                "units": len(G.units),
                "equals_unit_functions": True,
            })
        for A in task.params.get("algebras", []):
            core = core_of(A, p)
            entry = {
                "object": A.name,
                "p": p.label,
                "core_dimension": core.dimension,
                "commutative": core.is_commutative(),
            }
            if expect:
                ok = same_span(core.basis, _expected_core(expect, A))
                entry[f"equals_{expect}"] = ok
                statuses.append("pass" if ok else "fail")
            entries.append(entry)
    return _worst(statuses), {"cores": entries}


def _run_weyl(task: TaskSpec, rng) -> Outcome:
    tol = task.tolerances
    weights = int(task.params.get("roundtrip_weights", 0))
    soundness = int(task.params.get("soundness_samples", 0))
    expect_arrows = task.params.get("expect_arrows")
    entries = []
    statuses = []
    for G in task.params.get("groupoids", []):
        principal = is_principal(G)
        for k, p in enumerate(_default_p(task, 1, 3)):
            weyl = reconstruct_weyl(G, p, limit=tol.max_bisections, max_nodes=tol.max_search_nodes)
            W = weyl.groupoid
            entry = {
                "object": G.name,
                "p": p.label,
                "weyl_arrows": len(W.arrows),
                "weyl_units": len(W.units),
                "principal": principal,
            }
            if weyl.isomorphism is not None:
                arrow_map = sorted(weyl.isomorphism.items(), key=repr)
                entry["isomorphism"] = {fmt_label(w): fmt_label(g) for w, g in arrow_map}
            if expect_arrows is not None:
                ok = len(W.arrows) == expect_arrows
                entry["expected_arrows"] = expect_arrows
                statuses.append("pass" if ok else "fail")
            if k == 0 and principal and weights:
                entry["round_trips"] = bisection_round_trip(G, rng, weights, tol.max_bisections)
            if k == 0 and principal and soundness:
                maps = realizable_maps(G, p, limit=tol.max_bisections, rng=rng).maps
                counts = random_pair_soundness(G, set(maps), rng, soundness)
                entry["random_pairs"] = {
                    "accepted": counts.accepted,
                    "rejected": counts.rejected,
                    "bisections_recovered": counts.bisections_recovered,
                    "rejections_rechecked": counts.rejections_rechecked,
                    "rejected_by_condition": dict(sorted(counts.by_condition.items())),
                }
            entries.append(entry)
    return _worst(statuses), {"weyl": entries}


def _run_coe(task: TaskSpec, rng) -> Outcome:
    tol = task.tolerances
    pairs = task.params["pairs"]
    expect = task.params.get("expect")
    if expect is not None and (not isinstance(expect, list) or len(expect) != len(pairs)):
        raise InvalidInputError("'expect' must list one verdict per pair")
    entries = []
    statuses = []
    for k, (A, B) in enumerate(pairs):
        result = coe_search(A, B, tol.max_search_nodes)
        if result is not None:
            verify_coe(A, B, result)
        GA, GB = transformation_groupoid(A), transformation_groupoid(B)
        iso = find_isomorphism(GA, GB, tol.max_search_nodes)
        found, isomorphic = result is not None, iso is not None
        entry = {
            "pair": [A.name, B.name],
            "orbit_equivalent": found,
            "groupoids_isomorphic": isomorphic,
            "agree": found == isomorphic,
        }
        if result is not None:
            entry["theta"] = {fmt_label(x): fmt_label(y) for x, y in result.theta.items()}
        ok = found == isomorphic
        if expect is not None:
            verdict = "equivalent" if found else "inequivalent"
            entry["expected"] = expect[k]
            ok = ok and verdict == expect[k]
        statuses.append("pass" if ok else "fail")
        entries.append(entry)
    return _worst(statuses), {"pairs": entries}


def _run_norms(task: TaskSpec, rng) -> Outcome:
    tol = task.tolerances
    samples = int(task.params.get("samples", 200))
    slack = tol.norm_slack
    entries = []
    statuses = []
    kwargs = {"restarts": tol.power_restarts, "tol": tol.power_tol}
    for G in task.params.get("groupoids", []):
        for p in _default_p(task, 1, "3/2", 3):
            violations = uncollapsed = misses = contractions = 0
            widest = 0.0
            for k in range(samples):
                f = random_element(G, rng)
                if f.is_zero():
                    continue
                est = lambda_norm(f, p, seed=k, **kwargs)
                widest = max(widest, est.width)
                if sup_norm(f) > est.lower + slack or est.upper > i_norm(f) + slack:
                    violations += 1
                g = G.arrows[int(rng.integers(len(G.arrows)))]
                try:
                    check_multiplier_contraction(g, f, p, slack, seed=k, **kwargs)
                except VerificationError as exc:
                    log(f"  {G.name} p={p.label}: {exc}")
                    contractions += 1
                u = random_element(G, rng, units_only=True)
                if u.is_zero():
                    continue
                est = lambda_norm(u, p, seed=k, **kwargs)
                if not est.contains(sup_norm(u), slack):
                    misses += 1
                elif est.width > slack:
                    uncollapsed += 1
            if violations or misses or contractions:
                statuses.append("fail")
            elif uncollapsed:
                statuses.append("inconclusive-interval")
            entries.append({
                "object": G.name,
                "p": p.label,
                "samples": samples,
                "sandwich_violations": violations,
                "multiplier_violations": contractions,
                "unit_supported_misses": misses,
                "unit_supported_uncollapsed": uncollapsed,
                "widest_interval": fmt_float(widest),
            })
    return _worst(statuses), {"norms": entries}


def _run_crossed(task: TaskSpec, rng) -> Outcome:
    tol = task.tolerances
    samples = int(task.params.get("samples", 3))
    entries = []
    for p in _default_p(task, 1, 3):
        for A in task.params.get("actions", []):
            iso = action_from_group_action(A, p)
            entry = {"object": iso.name, "p": p.label}
            entry.update(verify_core_theorem(iso, p).to_dict())
            cp = crossed_product_algebra(iso, p)
            entry["expectation_samples"] = check_crossed_expectation(cp, rng, samples)
            comparison = compare_with_transformation_groupoid(A, p, rng, samples, tol.norm_slack)
            entry["groupoid_comparison"] = comparison.to_dict()
            other = task.params.get("tensor_with")
            if other is not None:
                second = action_from_group_action(other, p)
                entry["tensor_products_checked"] = verify_tensor_compatibility(iso, second, p)
            entries.append(entry)
        if "group" in task.params:
            group, algebra = task.params["group"], task.params["algebra"]
            mats = task.params.get("implementers", "trivial")
            if mats == "trivial":
                action = trivial_algebra_action(group, algebra, p)
            elif isinstance(mats, list):
                action = isometric_action(
                    group,
                    algebra,
                    matrices_by_element(group, mats),
                    p,
                    f"{group.name} on {algebra.name}",
                )
            else:
                raise InvalidInputError("implementers must be 'trivial' or a list of matrices")
            entry = {"object": action.name, "p": p.label}
            entry.update(verify_core_theorem(action, p).to_dict())
            cp = crossed_product_algebra(action, p)
            entry["expectation_samples"] = check_crossed_expectation(cp, rng, samples)
            entries.append(entry)
    return "pass", {"crossed": entries}


def _leavitt_report(task: TaskSpec, rng) -> Tuple[bool, Dict[str, object]]:
    params = task.params
    check = params["check"]
    mutate = bool(params.get("mutate", False))
    if check == "covariant":
        n = int(params.get("n", 2))
        images = mutated_covariant_images(n) if mutate else covariant_images(n)
        report = verify_covariant_presentation(n, images)
        return report.passed, {"n": n, "mutated": mutate, **report.to_dict()}
    if check == "absorption":
        k = int(params.get("k", 2))
        if mutate:
            X, Y = absorption_generators(k)
            X[0] = X[0].replace(0, 0, -X[0][0, 0])
            report = check_cuntz_relations(X, Y)
        else:
            report = verify_matrix_absorption(k)
        return report.passed, {"k": k, "n": 2 * k, "mutated": mutate, **report.to_dict()}
    if check == "model":
        n = int(params.get("n", 2))
        depth = int(params.get("depth", 4))
        degree = int(params.get("degree", 1))
        samples = int(params.get("samples", 0))
        p = _default_p(task, 2)[0]
        model, report = truncated_spatial_representation(n, depth, p)
        independent = monomials_independent(n, degree, depth)
        # products of two degree-1 elements have an empty window below depth 10
        deep = model if depth >= 10 or not samples else TruncatedModel(n, 10)
        sound = 0
        for _ in range(samples):
            e = random_leavitt_element(n, rng, degree=1, terms=2)
            f = random_leavitt_element(n, rng, degree=1, terms=2)
            if not product_agrees_in_model(deep, e, f):
                raise VerificationError("rho(e f) = rho(e) rho(f) on the window", f"{e!r} * {f!r}")
            sound += 1
        ok = (
            report.toeplitz_below_depth
            and report.sum_relation_above_zero
            and report.spatial
            and independent
            and all(est.contains(1.0, task.tolerances.norm_slack) for est in report.s_norms)
        )
        data = report.to_dict()
        data.update(degree=degree, monomials_independent=independent, products_checked=sound)
        return ok, data
    n = int(params.get("n", 2))
    samples = int(params.get("samples", 1000))
    degree = int(params.get("degree", 3))
    report = check_confluence(n, rng, samples, degree)
    return report.passed, report.to_dict()


def _run_leavitt(task: TaskSpec, rng) -> Outcome:
    ok, data = _leavitt_report(task, rng)
    return ("pass" if ok else "fail"), data


def _run_hermitian(task: TaskSpec, rng) -> Outcome:
    tol = task.tolerances
    element = task.params.get("element")
    expect = task.params.get("expect")
    samples = int(task.params.get("samples", 0))
    statuses = []
    entries = []
    for A in task.params["algebras"]:
        for p in _default_p(task, 3):
            entry: Dict[str, object] = {"object": A.name, "p": p.label}
            kwargs = {
                "tau": tol.hermitian_tau,
                "restarts": tol.power_restarts,
                "seed": int(rng.integers(2**31)),
            }
            if element is not None:
                verdict = is_hermitian(A, element, p, **kwargs)
                entry["element"] = verdict.to_dict()
                if expect is not None and verdict.hermitian != bool(expect):
                    statuses.append("fail")
                elif not verdict.dynamical_agrees:
                    statuses.append("inconclusive-interval")
            if samples:
                herm = hermitian_basis(A, p)
                disagreements = 0
                for k in range(samples):
                    if k % 2 == 0 and herm:
                        coeffs = [to_scalar(int(rng.integers(-3, 4))) for _ in herm]
                        a = linear_combination(coeffs, herm)
                    else:
                        a = A.random_element(rng)
                    if not is_hermitian(A, a, p, **kwargs).dynamical_agrees:
                        disagreements += 1
                entry["random_samples"] = samples
                entry["dynamical_disagreements"] = disagreements
                if disagreements:
                    statuses.append("inconclusive-interval")
            entries.append(entry)
    return _worst(statuses), {"hermitian": entries}


def _run_lamperti(task: TaskSpec, rng) -> Outcome:
    n = int(task.params.get("n", 4))
    samples = int(task.params.get("samples", 1000))
    entries = []
    failures = 0
    for p in _default_p(task, 3):
        recovered = rejected = 0
        for _ in range(samples):
            fact = random_lamperti(n, rng)
            M = fact.recompose()
            if lamperti_decompose(M, p) == fact and is_lamperti_isometry(M.to_numpy(), p):
                recovered += 1
        negatives = max(1, samples // 10)
        for _ in range(negatives):
            if not is_lamperti_isometry(random_non_lamperti(n, rng), p):
                rejected += 1
        failures += (samples - recovered) + (negatives - rejected)
        entries.append({
            "p": p.label,
            "n": n,
            "factorizations": samples,
            "recovered": recovered,
            "non_lamperti": negatives,
            "rejected": rejected,
        })
    return ("pass" if failures == 0 else "fail"), {"lamperti": entries}


HANDLERS: Dict[str, Callable[[TaskSpec, object], Outcome]] = {
    "validate": _run_validate,
    "core": _run_core,
    "weyl": _run_weyl,
    "coe": _run_coe,
    "norms": _run_norms,
    "crossed": _run_crossed,
    "leavitt": _run_leavitt,
    "hermitian": _run_hermitian,
    "lamperti": _run_lamperti,
}


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


def run_task(task: TaskSpec, seed: int = DEFAULT_SEED, index: int = 0) -> TaskResult:
    """Run one task; library errors become statuses, never exceptions."""
    rng = np.random.default_rng([task.seed if task.seed is not None else seed, index])
    error = ""
    data: Dict[str, object] = {}
    with stopwatch() as elapsed:
        try:
            status, data = HANDLERS[task.command](task, rng)
        except GuardExceeded as e:
            status, error = "inconclusive-guard", str(e)
        except VerificationError as e:
            status, error = "fail", str(e)
        except WorkbenchError as e:
            status, error = "fail", f"rejected: {e}"
        except Exception as e:
            status, error = "fail", f"{type(e).__name__}: {e}"
    return TaskResult(task.key, task.command, status, CLAIMS[task.command], data, error, elapsed[0])


def run(spec: SpecFile, seed: int = DEFAULT_SEED, workers: Optional[int] = None) -> Report:
    """Run every task of a spec; results keep spec order whatever the completion order."""
    workers = max(1, workers or MAX_TASK_WORKERS)
    total = len(spec.tasks)
    banner(f"RUNNING {plural(total, 'task').upper()}: {spec.path}")
    log(f"Seed: {seed}  Workers: {workers}")
    results: List[Optional[TaskResult]] = [None] * total
    done = 0
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(run_task, task, seed, i): i for i, task in enumerate(spec.tasks)}
        for future in as_completed(futures):
            i = futures[future]
            result = future.result()
            results[i] = result
            done += 1
            line = f"  [{done}/{total}] task.{result.key} {result.command}: {result.status}"
            log(line + (f" ({result.error})" if result.error else ""))
    report = Report(spec.path, seed, [r for r in results if r is not None])
    summary = report.summary()
    log("")
    log("Summary: " + ", ".join(f"{k} {v}" for k, v in summary.items()))
    return report
