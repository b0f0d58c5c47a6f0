"""Oracle suite: loss equivalence, gradient checks and structural invariants.

Each check returns a CheckResult; ``run_verification`` collects them into a
report the CLI serialises and maps onto its exit code.
"""

import time
from collections.abc import Callable
from dataclasses import dataclass, replace
from math import comb

import numpy as np
from pydantic import BaseModel

from surit.config import Assignment, ExperimentConfig
from surit.data.synth import TRAIN, build_corpus, generate_mixture
from surit.decode import greedy_decode_asr, greedy_decode_sid
from surit.lattice import (
    AlignmentLattice,
    LatencyConfig,
    LatticeMode,
    NodeLogits,
    apply_latency_penalty,
    frontier_log_masses,
    hat_node_logprobs,
    rnnt_node_logprobs,
    transducer_grad,
    transducer_loss,
)
from surit.logging_config import verify_logger
from surit.model.losses import Objective, joint_loss, pit_loss, sample_inputs, sample_loss
from surit.model.network import unmix
from surit.model.scorers import AsrStreamScorer, SidStreamScorer
from surit.neural import ops
from surit.neural.params import init_params
from surit.oracle import Blank, compare_gradients, enumerate_loss, enumerate_paths, finite_diff


@dataclass(frozen=True)
class VerifyBounds:
    """Sizes and tolerances of the oracle suite."""

    n_lattices: int = 1000
    max_T: int = 5
    max_U: int = 3
    max_K: int = 4
    n_grad_lattices: int = 12
    n_invariant_trials: int = 200
    n_causality_trials: int = 1000
    loss_rtol: float = 1e-9
    lattice_rtol: float = 1e-4
    ops_rtol: float = 1e-5
    model_rtol: float = 1e-3
    fd_step: float = 1e-5
    seed: int = 0


class CheckResult(BaseModel):
    name: str
    passed: bool
    n: int
    max_error: float = 0.0
    seconds: float = 0.0
    detail: str = ""


class VerificationReport(BaseModel):
    passed: bool
    checks: list[CheckResult]


def random_lattice(
    rng: np.random.Generator, mode: LatticeMode, T: int, U: int, V: int, scale: float = 2.0
) -> AlignmentLattice:
    return AlignmentLattice(
        mode=mode,
        blank_logits=rng.normal(0.0, scale, size=(T, U + 1)),
        label_logits=rng.normal(0.0, scale, size=(T, U + 1, V)),
        targets=rng.integers(0, V, size=U),
    )


def _random_shape(rng: np.random.Generator, bounds: VerifyBounds) -> tuple[int, int, int]:
    return (
        int(rng.integers(1, bounds.max_T + 1)),
        int(rng.integers(0, bounds.max_U + 1)),
        int(rng.integers(1, bounds.max_K + 1)),
    )


def _relative_error(a: float, b: float) -> float:
    """Relative error with an absolute floor for losses near zero."""
    return abs(a - b) / max(abs(a), abs(b), 1e-3)


def check_loss_equivalence(bounds: VerifyBounds) -> CheckResult:
    rng = np.random.default_rng([bounds.seed, 1])
    worst = 0.0
    failures = 0
    for i in range(bounds.n_lattices):
        mode = LatticeMode.RNNT if i % 2 == 0 else LatticeMode.HAT
        lattice = random_lattice(rng, mode, *_random_shape(rng, bounds))
        if mode is LatticeMode.HAT and i % 4 == 1:
            cfg = LatencyConfig(beta=float(rng.uniform(0.0, 2.0)), t_buffer=int(rng.integers(0, 3)))
            lattice = apply_latency_penalty(lattice, cfg)
        dp, _ = transducer_loss(lattice)
        error = _relative_error(dp, enumerate_loss(lattice))
        worst = max(worst, error)
        failures += error > bounds.loss_rtol
    return CheckResult(
        name="loss_equivalence",
        passed=failures == 0,
        n=bounds.n_lattices,
        max_error=worst,
        detail=f"{failures} lattices disagree with path enumeration",
    )


def check_path_counts(bounds: VerifyBounds) -> CheckResult:
    failures = 0
    n = 0
    for T in range(1, bounds.max_T + 1):
        for U in range(bounds.max_U + 1):
            n += 1
            enumeration = enumerate_paths(T, U)
            blanks_ok = all(sum(isinstance(m, Blank) for m in p) == T - 1 for p in enumeration.paths)
            failures += enumeration.count != comb(T - 1 + U, U) or not blanks_ok
    return CheckResult(name="path_counts", passed=failures == 0, n=n, detail=f"{failures} shapes miscounted")


def _lattice_grad_check(lattice: AlignmentLattice, bounds: VerifyBounds) -> tuple[int, float]:
    _, occupancy = transducer_loss(lattice)
    grad = transducer_grad(lattice, occupancy)

    def loss_fn(logits: dict[str, np.ndarray]) -> float:
        trial = replace(lattice, blank_logits=logits["blank"], label_logits=logits["label"])
        return transducer_loss(trial)[0]

    numeric = finite_diff(
        loss_fn, {"blank": lattice.blank_logits, "label": lattice.label_logits}, step=bounds.fd_step
    )
    result = compare_gradients({"blank": grad.blank, "label": grad.label}, numeric, rtol=bounds.lattice_rtol)
    return result.n_failed, result.max_rel_error


def check_lattice_gradients(bounds: VerifyBounds) -> CheckResult:
    rng = np.random.default_rng([bounds.seed, 2])
    failures = 0
    worst = 0.0
    n = 0
    for mode in LatticeMode:
        for i in range(bounds.n_grad_lattices):
            lattice = random_lattice(rng, mode, *_random_shape(rng, bounds), scale=1.0)
            if mode is LatticeMode.HAT and i % 2:
                lattice = apply_latency_penalty(lattice, LatencyConfig(beta=1.0, t_buffer=1))
            failed, error = _lattice_grad_check(lattice, bounds)
            failures += failed
            worst = max(worst, error)
            n += 1
    return CheckResult(
        name="lattice_gradients",
        passed=failures == 0,
        n=n,
        max_error=worst,
        detail=f"{failures} coordinates outside tolerance",
    )


def check_normalization(bounds: VerifyBounds) -> CheckResult:
    rng = np.random.default_rng([bounds.seed, 3])
    worst = 0.0
    for _ in range(bounds.n_invariant_trials):
        node = NodeLogits(float(rng.normal(0.0, 3.0)), rng.normal(0.0, 3.0, size=int(rng.integers(1, 9))))
        for node_fn in (rnnt_node_logprobs, hat_node_logprobs):
            log_blank, log_labels = node_fn(node)
            total = np.exp(log_blank) + np.exp(log_labels).sum()
            worst = max(worst, abs(total - 1.0))
    return CheckResult(name="normalization", passed=worst <= 1e-12, n=2 * bounds.n_invariant_trials, max_error=worst)


def check_frontier_identity(bounds: VerifyBounds) -> CheckResult:
    rng = np.random.default_rng([bounds.seed, 4])
    worst = 0.0
    for i in range(bounds.n_invariant_trials):
        mode = LatticeMode.RNNT if i % 2 == 0 else LatticeMode.HAT
        _, occupancy = transducer_loss(random_lattice(rng, mode, *_random_shape(rng, bounds)))
        masses = frontier_log_masses(occupancy)
        if masses.size:
            worst = max(worst, float(np.max(np.abs(masses))))
    return CheckResult(name="frontier_identity", passed=worst <= 1e-9, n=bounds.n_invariant_trials, max_error=worst)


def check_penalty_monotonicity(bounds: VerifyBounds) -> CheckResult:
    rng = np.random.default_rng([bounds.seed, 5])
    violations = 0
    for _ in range(bounds.n_invariant_trials):
        lattice = random_lattice(rng, LatticeMode.HAT, *_random_shape(rng, bounds))
        previous = np.inf
        for beta in (0.0, 0.5, 1.0, 2.0, 4.0):
            _, occupancy = transducer_loss(apply_latency_penalty(lattice, LatencyConfig(beta=beta, t_buffer=1)))
            violations += occupancy.log_likelihood > previous + 1e-12
            previous = occupancy.log_likelihood
    return CheckResult(
        name="penalty_monotonicity",
        passed=violations == 0,
        n=bounds.n_invariant_trials,
        detail=f"{violations} increases of log-likelihood with beta",
    )


def check_pit_bound(bounds: VerifyBounds) -> CheckResult:
    """PIT recognition loss on the tiny model: never above HEAT, equal to the best assignment."""
    config, sample, params = _tiny_setup(bounds)
    rng = np.random.default_rng([bounds.seed, 6])
    X, _ = sample_inputs(sample, config.model.splice_context)
    heat_objective = Objective(lambda_sid=0.0)
    pit_objective = Objective(lambda_sid=0.0, assignment=Assignment.PIT)

    def asr_result(inputs: np.ndarray, Y1: tuple[int, ...], Y2: tuple[int, ...], objective: Objective):
        return joint_loss(
            params, inputs, Y1, Y2, sample.S1, sample.S2, sample.inventory, objective, with_grad=False
        ).asr

    def reference() -> tuple[int, ...]:
        return tuple(int(v) for v in rng.integers(0, config.data.vocab_size, size=int(rng.integers(0, 4))))

    violations = 0
    worst = 0.0
    for _ in range(bounds.n_lattices):
        inputs = rng.normal(0.0, 2.0, size=X.shape)
        Y1, Y2 = reference(), reference()
        heat = asr_result(inputs, Y1, Y2, heat_objective)
        crossed = asr_result(inputs, Y2, Y1, heat_objective)
        pit = asr_result(inputs, Y1, Y2, pit_objective)
        best = pit_loss(np.array([[heat.terms[0], crossed.terms[0]], [crossed.terms[1], heat.terms[1]]]))
        error = _relative_error(pit.loss, best)
        worst = max(worst, error)
        violations += pit.loss > heat.loss + 1e-12 or error > bounds.loss_rtol
    return CheckResult(
        name="pit_bound",
        passed=violations == 0,
        n=bounds.n_lattices,
        max_error=worst,
        detail=f"{violations} instances where PIT exceeds HEAT or misses the best assignment",
    )


def _ops_cases(rng: np.random.Generator) -> list[tuple[str, Callable, dict[str, np.ndarray]]]:
    """(name, forward returning (out, cache), inputs) for every differentiable op."""
    T, d_in, d_out, H = 4, 3, 2, 3
    k = 2
    return [
        ("linear", lambda p: ops.linear_forward(p["x"], p["W"], p["b"]),
         {"x": rng.normal(size=(T, d_in)), "W": rng.normal(size=(d_in, d_out)), "b": rng.normal(size=d_out)}),
        ("conv1d", lambda p: ops.conv1d_forward(p["x"], p["W"], p["b"]),
         {"x": rng.normal(size=(T, d_in)), "W": rng.normal(size=(k, d_in, d_out)), "b": rng.normal(size=d_out)}),
        ("sigmoid", lambda p: ops.sigmoid_forward(p["x"]), {"x": rng.normal(size=(T, d_in))}),
        ("tanh", lambda p: ops.tanh_forward(p["x"]), {"x": rng.normal(size=(T, d_in))}),
        ("softmax", lambda p: ops.softmax_forward(p["x"]), {"x": rng.normal(size=(T, d_in))}),
        ("time_reduction", lambda p: ops.time_reduction_forward(p["x"], p["W"], p["b"]),
         {"x": rng.normal(size=(T + 1, d_in)), "W": rng.normal(size=(2 * d_in, d_out)), "b": rng.normal(size=d_out)}),
        ("recurrent_step", lambda p: ops.recurrent_step_forward(p["x"], p["h"], p["W"], p["U"], p["b"]),
         {"x": rng.normal(size=d_in), "h": rng.normal(size=H), "W": rng.normal(size=(d_in, 3 * H)),
          "U": rng.normal(size=(H, 3 * H)), "b": rng.normal(size=3 * H)}),
        ("recurrent", lambda p: ops.recurrent_forward(p["x"], p["h"], p["W"], p["U"], p["b"]),
         {"x": rng.normal(size=(T, d_in)), "h": rng.normal(size=H), "W": rng.normal(size=(d_in, 3 * H)),
          "U": rng.normal(size=(H, 3 * H)), "b": rng.normal(size=3 * H)}),
    ]


_BACKWARD = {
    "linear": (ops.linear_backward, ("x", "W", "b")),
    "conv1d": (ops.conv1d_backward, ("x", "W", "b")),
    "sigmoid": (ops.sigmoid_backward, ("x",)),
    "tanh": (ops.tanh_backward, ("x",)),
    "softmax": (ops.softmax_backward, ("x",)),
    "time_reduction": (ops.time_reduction_backward, ("x", "W", "b")),
    "recurrent_step": (ops.recurrent_step_backward, ("x", "h", "W", "U", "b")),
    "recurrent": (ops.recurrent_backward, ("x", "h", "W", "U", "b")),
}


def op_gradients(name: str, forward: Callable, inputs: dict[str, np.ndarray], probe: np.ndarray) -> dict[str, np.ndarray]:
    """Analytic gradients of sum(probe * forward(inputs)) keyed like ``inputs``."""
    backward, names = _BACKWARD[name]
    _, cache = forward(inputs)
    grads = backward(probe, cache)
    if not isinstance(grads, tuple):
        grads = (grads,)
    return dict(zip(names, grads, strict=True))


def check_neural_ops(bounds: VerifyBounds) -> CheckResult:
    rng = np.random.default_rng([bounds.seed, 7])
    failures = []
    worst = 0.0
    cases = _ops_cases(rng)
    for name, forward, inputs in cases:
        out, _ = forward(inputs)
        probe = rng.normal(size=out.shape)
        analytic = op_gradients(name, forward, inputs, probe)
        numeric = finite_diff(lambda p, f=forward, r=probe: float(np.sum(f(p)[0] * r)), inputs, step=bounds.fd_step)
        result = compare_gradients(analytic, numeric, rtol=bounds.ops_rtol, atol=1e-8)
        worst = max(worst, result.max_rel_error)
        if not result.passed:
            failures.append(name)
    return CheckResult(
        name="neural_ops",
        passed=not failures,
        n=len(cases),
        max_error=worst,
        detail=", ".join(failures),
    )


def _tiny_setup(bounds: VerifyBounds):
    config = ExperimentConfig.tiny(seed=bounds.seed)
    corpus = build_corpus(config.data, config.seed)
    sample = generate_mixture(corpus, TRAIN, 0)
    params = init_params(config, config.seed)
    return config, sample, params


def check_model_gradient(bounds: VerifyBounds) -> CheckResult:
    config, sample, params = _tiny_setup(bounds)
    objective = Objective(
        lambda_sid=config.training.lambda_sid,
        latency=LatencyConfig(alpha=1.0, beta=1.0, t_buffer=1),
        splice_context=config.model.splice_context,
    )
    analytic = sample_loss(params, sample, objective).grads
    numeric = finite_diff(
        lambda p: sample_loss(p, sample, objective, with_grad=False).loss, params, step=bounds.fd_step
    )
    result = compare_gradients(analytic, numeric, rtol=bounds.model_rtol, atol=1e-7)
    return CheckResult(
        name="model_gradient",
        passed=result.passed,
        n=result.n_checked,
        max_error=result.max_rel_error,
        detail=f"{result.n_failed} of {params.size()} parameters outside tolerance",
    )


def check_model_invariants(bounds: VerifyBounds) -> CheckResult:
    """Stream conservation and joint-loss linearity on the tiny model."""
    config, sample, params = _tiny_setup(bounds)
    rng = np.random.default_rng([bounds.seed, 9])
    X, _ = sample_inputs(sample, config.model.splice_context)
    unconserved = 0
    conservation = 0.0
    for trial in range(bounds.n_invariant_trials):
        inputs = X if trial == 0 else rng.normal(0.0, 3.0, size=X.shape)
        streams = unmix(params, inputs)
        total = streams.H1 + streams.H2
        if not np.array_equal(total, streams.H):
            unconserved += 1
            conservation = max(conservation, float(np.max(np.abs(total - streams.H))))
    objective = Objective(lambda_sid=config.training.lambda_sid, splice_context=config.model.splice_context)
    result = sample_loss(params, sample, objective)
    linear_error = 0.0
    for name, value in result.grads.items():
        expected = result.asr.grads[name] + objective.lambda_sid * result.sid.grads[name]
        linear_error = max(linear_error, float(np.max(np.abs(value - expected), initial=0.0)))
    passed = unconserved == 0 and linear_error <= 1e-12
    return CheckResult(
        name="model_invariants",
        passed=passed,
        n=bounds.n_invariant_trials + 1,
        max_error=max(conservation, linear_error),
        detail=f"unconserved={unconserved} conservation={conservation:.3g} linearity={linear_error:.3g}",
    )


def check_decoder_causality(bounds: VerifyBounds) -> CheckResult:
    """Perturbing frames after t never changes events stamped at or before t."""
    config, sample, params = _tiny_setup(bounds)
    rng = np.random.default_rng([bounds.seed, 8])
    X, _ = sample_inputs(sample, config.model.splice_context)
    stream = unmix(params, X).H1 * 5.0
    T = stream.shape[0]
    base_tokens = greedy_decode_asr(AsrStreamScorer(params, stream))
    base_sid = greedy_decode_sid(SidStreamScorer(params, stream, sample.inventory))
    violations = 0
    for _ in range(bounds.n_causality_trials):
        t = int(rng.integers(0, T))
        perturbed = stream.copy()
        perturbed[t + 1 :] += rng.normal(0.0, 5.0, size=perturbed[t + 1 :].shape)
        tokens = greedy_decode_asr(AsrStreamScorer(params, perturbed))
        sid = greedy_decode_sid(SidStreamScorer(params, perturbed, sample.inventory))
        violations += [e for e in tokens if e.frame <= t + 1] != [e for e in base_tokens if e.frame <= t + 1]
        violations += [e for e in sid.events if e.frame <= t + 1] != [e for e in base_sid.events if e.frame <= t + 1]
    return CheckResult(name="decoder_causality", passed=violations == 0, n=bounds.n_causality_trials)


CHECKS: list[Callable[[VerifyBounds], CheckResult]] = [
    check_loss_equivalence,
    check_path_counts,
    check_lattice_gradients,
    check_normalization,
    check_frontier_identity,
    check_penalty_monotonicity,
    check_pit_bound,
    check_neural_ops,
    check_model_gradient,
    check_model_invariants,
    check_decoder_causality,
]


def run_verification(bounds: VerifyBounds | None = None) -> VerificationReport:
    bounds = bounds or VerifyBounds()
    results = []
    for check in CHECKS:
        started = time.perf_counter()
        result = check(bounds)
        result.seconds = round(time.perf_counter() - started, 3)
        log = verify_logger.info if result.passed else verify_logger.error
        log("Check finished", check=result.name, passed=result.passed, n=result.n, max_error=result.max_error)
        results.append(result)
    return VerificationReport(passed=all(r.passed for r in results), checks=results)
