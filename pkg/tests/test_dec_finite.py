import math

import numpy as np
import pytest

from e2d.instances import (
    FiniteInstance,
    delta_vector,
    gap_matrix,
    info_matrix,
    shifted_gap_matrix,
)
from e2d.dec_finite import (
    dec_ac,
    dec_ac_shifted,
    dec_constrained_oracle,
    dec_offset,
    generalized_dec_bound,
    info_ratio,
    max_info_ratio,
    pac_dec,
    simplex_grid,
)
from e2d.rng import RngStream

from oracles import dec_ac_exhaustive, dec_offset_grid, min_ratio_grid


def unit_info_2x2():
    """Rewards (1,0)/(0,1) with KL = 1 between the models at every decision."""
    gap = np.sqrt(2.0)
    return FiniteInstance.from_tables([[1.0, 0.0], [0.0, 1.0]],
                                      [[0.0, 0.0], [gap, gap]], 1.0)


def random_assumption1(rng, n_dec=None, n_mod=None):
    """Random instance with obs_mean = rewards and sigma^2 = 0.5, so the
    pointwise reward data-processing inequality holds with equality."""
    p = n_dec if n_dec is not None else 2 + rng.integers(0, 2)
    h = n_mod if n_mod is not None else 2 + rng.integers(0, 2)
    r = rng.uniforms(p * h).reshape(h, p)
    return FiniteInstance.from_tables(r, obs_variance=0.5)


def test_simplex_grid_counts():
    g = simplex_grid(3, 0.02)
    assert g.shape == (1326, 3)
    assert np.allclose(g.sum(axis=1), 1.0)
    assert g.min() >= 0.0
    with pytest.raises(ValueError):
        simplex_grid(2, 0.03)


def test_dec_offset_singleton():
    inst = FiniteInstance.from_tables([[1.0, 0.5]])
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    value, mu = dec_offset(gaps, info, 1.0)
    assert abs(value) <= 1e-9
    assert mu.weights[0] >= 1.0 - 1e-8


def test_dec_offset_closed_form_2x2():
    inst = unit_info_2x2()
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    for lam in [0.0, 0.25, 0.5, 0.9, 1.0, 1.7, 4.0]:
        closed = max(0.0, (1.0 - lam) / 2.0)
        assert abs(dec_offset_grid(gaps, info, lam) - closed) <= 1e-3
        value, _ = dec_offset(gaps, info, lam)
        assert abs(value - closed) <= 1e-8


def test_dec_offset_lambda_zero_is_minimax_gap():
    rng = RngStream(21)
    inst = random_assumption1(rng, 3, 3)
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    value, _ = dec_offset(gaps, info, 0.0)
    oracle = dec_ac_exhaustive(gaps, np.zeros_like(info), 10.0, 0.02, 0.02)
    assert abs(value - oracle) <= 2e-2


def test_dec_offset_input_errors():
    inst = unit_info_2x2()
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    with pytest.raises(ValueError):
        dec_offset(gaps, info, -1.0)
    with pytest.raises(ValueError):
        dec_offset(gaps, info[:1], 1.0)


def test_dec_ac_closed_form_2x2():
    inst = unit_info_2x2()
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    for eps_sq in [0.04, 0.1, 0.25, 0.5]:
        sol = dec_ac(gaps, info, math.sqrt(eps_sq), 200)
        assert abs(sol.value - eps_sq) <= 1e-3
    sol = dec_ac(gaps, info, math.sqrt(0.1), 200)
    assert abs(sol.lambda_star - 1.0) <= 5e-2
    assert sol.mu.weights[0] >= 0.99


def test_dec_ac_singleton_and_degenerate():
    inst = FiniteInstance.from_tables([[1.0, 0.5]])
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    for eps in [0.05, 0.3, 1.0]:
        assert dec_ac(gaps, info, eps, 30).value <= 1e-9
    flat = FiniteInstance.from_tables([[0.5, 0.5], [0.5, 0.5]], obs_variance=0.5)
    sol = dec_ac(gap_matrix(flat), info_matrix(flat, 0), 0.2, 30)
    assert abs(sol.value) <= 1e-9


def test_dec_ac_mab_table_bound():
    rng = RngStream(31)
    for n_arms in [2, 5]:
        r = rng.uniforms(6 * n_arms).reshape(6, n_arms)
        inst = FiniteInstance.from_tables(r, obs_variance=0.5)
        gaps, info = gap_matrix(inst), info_matrix(inst, 0)
        for eps in [0.1, 0.2]:
            assert dec_ac(gaps, info, eps, 60).value <= 2.0 * eps * math.sqrt(n_arms)


def test_dec_ac_matches_exhaustive_oracle():
    rng = RngStream(2024)
    for _ in range(5):
        inst = random_assumption1(rng)
        gaps, info = gap_matrix(inst), info_matrix(inst, 0)
        eps = 0.1 + 0.3 * rng.uniform()
        sol = dec_ac(gaps, info, eps, 200)
        oracle = dec_ac_exhaustive(gaps, info, eps, 0.02, 0.02)
        assert abs(sol.value - oracle) <= 2e-2
        assert sol.value >= -1e-9
        assert sol.lambda_star * eps ** 2 <= sol.value + 1e-6


def test_dec_ac_lagrangian_identity_definitional():
    # with refinement off the solver IS the grid minimum of the offset program
    rng = RngStream(5)
    inst = random_assumption1(rng, 3, 3)
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    eps = 0.25
    sol = dec_ac(gaps, info, eps, 120, refine=False)
    top = gaps.max() / eps ** 2
    direct = min(dec_offset(gaps, info, lam)[0] + lam * eps ** 2
                 for lam in np.linspace(0.0, top, 120))
    assert abs(sol.value - direct) <= 1e-10


def test_dec_ac_monotone_in_epsilon():
    rng = RngStream(7)
    for _ in range(3):
        inst = random_assumption1(rng)
        gaps, info = gap_matrix(inst), info_matrix(inst, 0)
        vals = [dec_ac(gaps, info, e, 60).value for e in [0.05, 0.1, 0.2, 0.4]]
        for lo, hi in zip(vals, vals[1:]):
            assert lo <= hi + 1e-6


def test_dec_ac_shifted_examples():
    inst = FiniteInstance.from_tables([[1.0, 0.5]])
    gaps_f = shifted_gap_matrix(inst, 0)
    assert dec_ac_shifted(gaps_f, info_matrix(inst, 0), 0.3, 30).value <= 1e-9

    rng = RngStream(42)
    inst = random_assumption1(rng, 2, 2)
    eps = 0.1
    info = info_matrix(inst, 0)
    plain = dec_ac(gap_matrix(inst), info, eps, 120)
    shifted = dec_ac_shifted(shifted_gap_matrix(inst, 0), info, eps, 120)
    assert abs(shifted.value - plain.value) <= eps + 1e-6
    oracle_plain = dec_ac_exhaustive(gap_matrix(inst), info, eps, 0.02, 0.02)
    oracle_shift = dec_ac_exhaustive(shifted_gap_matrix(inst, 0), info, eps, 0.02, 0.02)
    assert abs(oracle_shift - oracle_plain) <= eps + 2e-2


def test_sandwich_on_assumption1_instances():
    rng = RngStream(404)
    for _ in range(4):
        inst = random_assumption1(rng)
        f = 0
        info = info_matrix(inst, f)
        eps = 0.15
        ac = dec_ac(gap_matrix(inst), info, eps, 80).value
        acs = dec_ac_shifted(shifted_gap_matrix(inst, f), info, eps, 80).value
        assert acs - eps - 1e-6 <= ac <= acs + eps + 1e-6


def test_dec_constrained_oracle():
    inst = FiniteInstance.from_tables([[1.0, 0.5]])
    assert dec_constrained_oracle(gap_matrix(inst), info_matrix(inst, 0), 0.3) <= 1e-9

    inst = unit_info_2x2()
    gaps, info = gap_matrix(inst), info_matrix(inst, 0)
    assert dec_constrained_oracle(gaps, info, 0.5, 0.02) <= 0.25 + 1e-9

    rng = RngStream(17)
    for _ in range(4):
        ri = random_assumption1(rng)
        g, i = gap_matrix(ri), info_matrix(ri, 0)
        eps = 0.1 + 0.2 * rng.uniform()
        assert dec_constrained_oracle(g, i, eps, 0.02) <= dec_ac(g, i, eps, 120).value + 5e-2


def test_dec_constrained_oracle_warns_when_large():
    rng = RngStream(3)
    inst = random_assumption1(rng, 5, 2)
    with pytest.warns(RuntimeWarning):
        dec_constrained_oracle(gap_matrix(inst), info_matrix(inst, 0), 0.3, 0.1)


def test_pac_dec_zero_when_values_agree():
    # all models share the same optimal value
    inst = FiniteInstance.from_tables([[1.0, 0.0], [0.0, 1.0]], obs_variance=0.5)
    d = delta_vector(inst, 0)
    assert np.allclose(d, 0.0)
    assert abs(pac_dec(d, info_matrix(inst, 0), 0.2, 40)) <= 1e-9


def test_pac_dec_revealing_decision():
    # decision 0 reveals the model identity faster than reward gaps accrue:
    # I(0, g) >= delta_f(g)^2, which caps the pac value at eps
    rng = RngStream(8)
    h = 4
    best_vals = np.sort(rng.uniforms(h))
    rewards = np.zeros((h, 3))
    rewards[:, 1] = best_vals
    obs = np.zeros((h, 3))
    obs[:, 0] = 2.0 * best_vals
    inst = FiniteInstance.from_tables(rewards, obs, obs_variance=0.5)
    f = 0
    for eps in [0.05, 0.1, 0.3]:
        val = pac_dec(delta_vector(inst, f), info_matrix(inst, f), eps, 80)
        assert val <= eps + 1e-6


def test_pac_to_regret_chain():
    rng = RngStream(55)
    for _ in range(2):
        inst = random_assumption1(rng, 3, 3)
        f = 0
        info = info_matrix(inst, f)
        gaps_f = shifted_gap_matrix(inst, f)
        eps = 0.15
        acs = dec_ac_shifted(gaps_f, info, eps, 80).value
        dmax = gap_matrix(inst).max()
        delta = delta_vector(inst, f)
        chain = min(pac_dec(delta, info, eps / math.sqrt(p), 40) + p * dmax
                    for p in np.arange(0.05, 1.0001, 0.05))
        assert acs <= chain + 1e-3


def test_info_ratio_reference_adversary():
    inst = unit_info_2x2()
    gaps_f, info = shifted_gap_matrix(inst, 0), info_matrix(inst, 0)
    nu = np.array([1.0, 0.0])
    assert info_ratio(gaps_f, info, nu) == 0.0


def test_info_ratio_against_grid_oracle():
    rng = RngStream(23)
    for _ in range(5):
        inst = random_assumption1(rng, 2, 2)
        gaps_f, info = shifted_gap_matrix(inst, 0), info_matrix(inst, 0)
        nu = np.array([0.5, 0.5])
        a, b = gaps_f @ nu, info @ nu
        if a.min() <= 0 or b.max() <= 0:
            continue
        val = info_ratio(gaps_f, info, nu)
        oracle = min_ratio_grid(a, b, 1e-3)
        assert val <= oracle + 1e-9
        assert oracle <= val + 1e-4


def test_info_ratio_degenerate_information():
    gaps_f = np.array([[1.0, 2.0], [3.0, 1.0]])
    info = np.zeros((2, 2))
    with pytest.warns(RuntimeWarning):
        assert math.isinf(info_ratio(gaps_f, info, np.array([0.5, 0.5])))


def test_lemma3_bound_via_nu_grid():
    rng = RngStream(31)
    for _ in range(3):
        inst = random_assumption1(rng)
        f = 0
        gaps_f, info = shifted_gap_matrix(inst, f), info_matrix(inst, f)
        eps = 0.15
        acs = dec_ac_shifted(gaps_f, info, eps, 80).value
        psi = max_info_ratio(gaps_f, info, 0.02)
        assert acs <= eps * math.sqrt(psi) + 1e-3


def test_generalized_bound_alpha2_agreement():
    rng = RngStream(67)
    inst = random_assumption1(rng, 3, 3)
    gaps_f, info = shifted_gap_matrix(inst, 0), info_matrix(inst, 0)
    eps = 0.2
    psi = max_info_ratio(gaps_f, info, 0.02)
    bound = generalized_dec_bound(gaps_f, info, eps, 2.0, nu_grid_step=0.02)
    assert abs(bound - eps * math.sqrt(psi)) <= 1e-6


def test_generalized_bound_dominates_dec():
    rng = RngStream(71)
    for _ in range(4):
        inst = random_assumption1(rng)
        gaps_f, info = shifted_gap_matrix(inst, 0), info_matrix(inst, 0)
        eps = 0.2
        acs = dec_ac_shifted(gaps_f, info, eps, 80).value
        for alpha in [1.5, 2.0, 3.0]:
            bound = generalized_dec_bound(gaps_f, info, eps, alpha, nu_grid_step=0.04)
            assert bound >= acs - 1e-6


def test_generalized_bound_edge_cases():
    inst = FiniteInstance.from_tables([[1.0, 0.5]])
    gaps_f, info = shifted_gap_matrix(inst, 0), info_matrix(inst, 0)
    with pytest.raises(ValueError):
        generalized_dec_bound(gaps_f, info, 0.2, 1.0)
    # singleton class: the ratio is 0, so the bound collapses to 0
    assert generalized_dec_bound(gaps_f, info, 0.2, 2.0) == 0.0
