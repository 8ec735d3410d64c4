"""Convergence and Cauchy detection across all modes."""
import numpy as np
import pytest

from ifnlab import (ConvergenceQuery, FunctionSequence, build_example,
                    build_reciprocal_shift, combine_linear, detect, detect_cauchy,
                    exceptional_set, lambda_family, lemma_equivalence_check)
from ifnlab.algebra import DomainError

EPS, T = 0.1, 1.0
# for the standard construction, "exceptional" unwinds to |f_k - f| >= eps*t/(1-eps)
GAP = EPS * T / (1.0 - EPS)


def query(mode, n_max, lam=None):
    return ConvergenceQuery(mode=mode, epsilon=EPS, time=T,
                            lam=lam or lambda_family("identity"), n_max=n_max)


def block_oscillator(grid):
    """f_k = 2 on blocks [100m, 100m+99] for odd m, else 0: density never settles."""
    def evaluate_many(ks, x):
        return 2.0 * ((np.asarray(ks) // 100) % 2).astype(float)

    return FunctionSequence(lambda k, x: float(evaluate_many(np.array([k]), x)[0]),
                            grid, "block oscillator", evaluate_many)


def alternating_sign(grid):
    def evaluate_many(ks, x):
        return np.where(np.asarray(ks) % 2 == 0, 1.0, -1.0)

    return FunctionSequence(lambda k, x: float(evaluate_many(np.array([k]), x)[0]),
                            grid, "alternating sign", evaluate_many)


# ---------------------------------------------------------------- exceptional set
def test_exceptional_set_closed_form(std_space, unit_grid):
    # x + 1/k vs limit x: exceptional iff 1/k >= GAP = 1/9, i.e. k <= 9
    fs, limit = build_reciprocal_shift(unit_grid)
    member = exceptional_set(fs, limit, std_space, 0.4, EPS, T)
    assert [k for k in range(1, 30) if member(k)] == list(range(1, 10))


def test_exceptional_set_respects_epsilon(std_space, unit_grid):
    fs, limit = build_reciprocal_shift(unit_grid)
    member = exceptional_set(fs, limit, std_space, 0.4, 0.5, T)  # gap = 1.0
    assert [k for k in range(1, 10) if member(k)] == [1]


# ---------------------------------------------------------------- classical mode
def test_classical_accepts_plain_convergence(std_space, unit_grid):
    fs, limit = build_reciprocal_shift(unit_grid)
    v = detect(fs, limit, std_space, query("ifn-classical", 10_000))
    assert v.verdict == "converges"
    assert set(v.details["last_exceptional"].values()) == {9}


def test_classical_rejects_recurring_bumps(std_space, unit_grid):
    lam = lambda_family("identity")
    fs, limit, _ = build_example("paper-example-1", lam, unit_grid)
    v = detect(fs, limit, std_space, query("ifn-classical", 10_000, lam))
    assert v.verdict == "fails"
    assert v.witnesses


def test_classical_inconclusive_between_thresholds(std_space, unit_grid):
    # last exceptional index at 70% of the horizon: too late to clear,
    # too early to condemn
    def evaluate_many(ks, x):
        return np.where(np.asarray(ks) == 7_000, 5.0, 0.0)

    fs = FunctionSequence(lambda k, x: float(evaluate_many(np.array([k]), x)[0]),
                          unit_grid, "late lone spike", evaluate_many)
    v = detect(fs, lambda x: 0.0, std_space, query("ifn-classical", 10_000))
    assert v.verdict == "inconclusive"


# ---------------------------------------------------------------- stat modes
def test_example_1_pointwise_stat_converges(std_space, unit_grid):
    lam = lambda_family("identity")
    fs, limit, mode = build_example("paper-example-1", lam, unit_grid)
    v = detect(fs, limit, std_space, query(mode, 100_000, lam))
    assert v.verdict == "converges"
    assert all(t.verdict == "limit-zero" for t in v.traces.values())


def test_example_2_uniform_stat_converges(std_space, unit_grid):
    lam = lambda_family("identity")
    fs, limit, mode = build_example("paper-example-2", lam, unit_grid)
    v = detect(fs, limit, std_space, query(mode, 100_000, lam))
    assert v.verdict == "converges"
    assert v.traces.verdict == "limit-zero"


def test_plain_stat_equals_lambda_stat_under_identity(std_space, unit_grid):
    # with lambda_n = n the window is [1, n] and the two modes coincide
    lam = lambda_family("identity")
    fs, limit, _ = build_example("paper-example-1", lam, unit_grid)
    v_plain = detect(fs, limit, std_space, query("pointwise-stat", 50_000, lam))
    v_lam = detect(fs, limit, std_space, query("pointwise-lambda-stat", 50_000, lam))
    assert v_plain.verdict == v_lam.verdict == "converges"
    for x in v_lam.traces:
        assert np.array_equal(v_plain.traces[x].ratios, v_lam.traces[x].ratios)


def test_plain_stat_ignores_configured_lambda(std_space, unit_grid):
    # pointwise-stat must use full windows even when handed a sqrt ladder
    lam = lambda_family("sqrt")
    fs, limit, _ = build_example("paper-example-1", lambda_family("identity"), unit_grid)
    v = detect(fs, limit, std_space, query("pointwise-stat", 50_000, lam))
    assert v.lambda_name == "identity"
    trace = v.traces[0.0]
    assert trace.lows[-1] == 1  # full window, not a sqrt-sized one


def test_classical_convergence_implies_stat(std_space, unit_grid, decay_factory):
    for seed in range(5):
        fs, limit = decay_factory(seed)
        v_cl = detect(fs, limit, std_space, query("ifn-classical", 10_000))
        v_st = detect(fs, limit, std_space, query("pointwise-lambda-stat", 10_000))
        assert v_cl.verdict == "converges"
        assert v_st.verdict == "converges"


def test_uniform_implies_pointwise(std_space, unit_grid, decay_factory):
    lam = lambda_family("identity")
    cases = [build_example(e, lam, unit_grid)[:2] for e in
             ("paper-example-1", "paper-example-2")]
    cases += [decay_factory(100 + s) for s in range(10)]
    for fs, limit in cases:
        v_u = detect(fs, limit, std_space, query("uniform-lambda-stat", 100_000, lam))
        if v_u.verdict == "converges":
            v_p = detect(fs, limit, std_space, query("pointwise-lambda-stat", 100_000, lam))
            assert v_p.verdict == "converges", fs.description


def test_uniform_union_mask_on_fine_grid(std_space):
    # all per-point exceptional sets of the first family sit inside the same
    # sparse bump set, so their union still has vanishing windowed density
    # and the uniform detector agrees with the pointwise one
    lam = lambda_family("identity")
    grid = np.linspace(0.0, 1.0, 201)
    fs, limit, _ = build_example("paper-example-1", lam, grid)
    v_u = detect(fs, limit, std_space, query("uniform-lambda-stat", 50_000, lam))
    v_p = detect(fs, limit, std_space, query("pointwise-lambda-stat", 50_000, lam))
    assert v_p.verdict == "converges"
    assert v_u.verdict == "converges"


def test_wrong_limit_fails_with_witnesses(std_space, unit_grid):
    lam = lambda_family("identity")
    fs, _, _ = build_example("paper-example-1", lam, unit_grid)
    v = detect(fs, lambda x: 0.0, std_space, query("pointwise-lambda-stat", 20_000, lam))
    assert v.verdict == "fails"
    assert v.witnesses
    # the zero guess is only wrong on [0.5, 1], where the base branch sits at 1 or 2
    assert all(x >= 0.5 for _, x in v.witnesses)
    for x, trace in v.traces.items():
        expected = "limit-zero" if x < 0.5 else "limit-one"
        assert trace.verdict == expected, x


def test_uniform_wrong_limit_attributes_witnesses(std_space, unit_grid):
    lam = lambda_family("identity")
    fs, _, _ = build_example("paper-example-1", lam, unit_grid)
    wrong = lambda x: 0.0
    v = detect(fs, wrong, std_space, query("uniform-lambda-stat", 20_000, lam))
    assert v.verdict == "fails"
    assert v.witnesses
    # every reported pair must actually satisfy the exceptional condition
    for k, x in v.witnesses:
        assert exceptional_set(fs, wrong, std_space, x, EPS, T)(k), (k, x)


def test_oscillating_density_is_inconclusive(std_space, unit_grid):
    fs = block_oscillator(unit_grid)
    v = detect(fs, lambda x: 0.0, std_space, query("pointwise-lambda-stat", 10_000))
    assert v.verdict == "inconclusive"
    assert v.traces[0.0].verdict == "inconclusive"


def test_linearity_of_stat_limits(std_space, unit_grid, decay_factory):
    lam = lambda_family("identity")
    f1, l1 = decay_factory(41)
    f2, l2 = decay_factory(42)
    for alpha, beta in ((1.0, 1.0), (2.0, -3.0), (0.5, 0.5)):
        combo = combine_linear(f1, f2, alpha, beta)
        target = lambda x: alpha * l1(x) + beta * l2(x)
        v = detect(combo, target, std_space, query("pointwise-lambda-stat", 10_000, lam))
        assert v.verdict == "converges", (alpha, beta)


def test_rejects_mismatched_modes(std_space, unit_grid):
    fs, limit = build_reciprocal_shift(unit_grid)
    with pytest.raises(DomainError):
        detect(fs, limit, std_space, query("pointwise-lambda-cauchy", 1_000))
    with pytest.raises(DomainError):
        detect_cauchy(fs, std_space, query("pointwise-lambda-stat", 1_000))
    with pytest.raises(DomainError):
        ConvergenceQuery(mode="sideways", epsilon=EPS, time=T,
                         lam=lambda_family("identity"), n_max=1_000)


def test_query_validates_parameters():
    lam = lambda_family("identity")
    with pytest.raises(DomainError):
        ConvergenceQuery(mode="pointwise-stat", epsilon=0.0, time=T, lam=lam, n_max=1000)
    with pytest.raises(DomainError):
        ConvergenceQuery(mode="pointwise-stat", epsilon=1.0, time=T, lam=lam, n_max=1000)
    with pytest.raises(DomainError):
        ConvergenceQuery(mode="pointwise-stat", epsilon=EPS, time=0.0, lam=lam, n_max=1000)
    with pytest.raises(DomainError):
        ConvergenceQuery(mode="pointwise-stat", epsilon=EPS, time=T, lam=lam, n_max=5)


def test_rejects_non_finite_sequence_values(std_space, unit_grid):
    def evaluate_many(ks, x):
        out = np.zeros(np.asarray(ks).shape)
        out[np.asarray(ks) == 37] = np.nan
        return out

    fs = FunctionSequence(lambda k, x: float(evaluate_many(np.array([k]), x)[0]),
                          unit_grid, "poisoned", evaluate_many)
    with pytest.raises(ValueError, match="37"):
        detect(fs, lambda x: 0.0, std_space, query("pointwise-lambda-stat", 1_000))


# ---------------------------------------------------------------- cauchy modes
def test_examples_are_lambda_cauchy(std_space, unit_grid):
    lam = lambda_family("identity")
    for example in ("paper-example-1", "paper-example-2"):
        fs, _, _ = build_example(example, lam, unit_grid)
        for mode in ("pointwise-lambda-cauchy", "uniform-lambda-cauchy"):
            v = detect_cauchy(fs, std_space, query(mode, 100_000, lam))
            assert v.verdict == "converges", (example, mode)


def test_alternating_sign_is_not_cauchy(std_space, unit_grid):
    # |f_j - f_k| is 2 between opposite parities; against the reference
    # f_{n_max} (even) the exceptional set is the odd indices, density 1/2
    fs = alternating_sign(unit_grid)
    v = detect_cauchy(fs, std_space, query("pointwise-lambda-cauchy", 10_000))
    assert v.verdict == "fails"
    trace = v.traces[0.0]
    assert trace.verdict == "limit-value"
    assert trace.estimate == pytest.approx(0.5, abs=1e-2)


def test_cauchy_uniform_mode_on_decay_families(std_space, decay_factory):
    for seed in (7, 8):
        fs, _ = decay_factory(seed)
        v = detect_cauchy(fs, std_space, query("uniform-lambda-cauchy", 10_000))
        assert v.verdict == "converges"


# ---------------------------------------------------------------- the lemma
def test_lemma_equivalences_on_examples(std_space, unit_grid):
    lam = lambda_family("identity")
    for example in ("paper-example-1", "paper-example-2"):
        fs, limit, mode = build_example(example, lam, unit_grid)
        q = ConvergenceQuery(mode=mode, epsilon=EPS, time=T, lam=lam, n_max=100_000)
        assert lemma_equivalence_check(fs, limit, std_space, q) is True


def test_lemma_equivalences_on_random_families(std_space, decay_factory):
    for seed in range(10):
        fs, limit = decay_factory(200 + seed)
        q = query("pointwise-lambda-stat", 10_000)
        assert lemma_equivalence_check(fs, limit, std_space, q) is True


def test_lemma_holds_even_when_all_statements_fail(std_space, unit_grid):
    # against a wrong limit all five statements are false together, which
    # still satisfies the equivalence
    lam = lambda_family("identity")
    fs, _, _ = build_example("paper-example-1", lam, unit_grid)
    q = query("pointwise-lambda-stat", 20_000, lam)
    assert lemma_equivalence_check(fs, lambda x: 0.0, std_space, q) is True


def test_lemma_requires_lambda_stat_mode(std_space, unit_grid):
    fs, limit = build_reciprocal_shift(unit_grid)
    with pytest.raises(DomainError):
        lemma_equivalence_check(fs, limit, std_space, query("ifn-classical", 1_000))
