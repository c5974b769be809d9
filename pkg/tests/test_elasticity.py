import numpy as np
import pytest

from igawave import elasticity as el
from igawave.splines import make_uniform_space
from oracles import elasticity_weak_form, flatten, gram, kron_xfast

MAT = el.MaterialParams(1.3, 0.7, 2.1)


def gaussian(X, Y):
    return np.exp(-((X - 0.5) ** 2 + (Y - 0.5) ** 2) / (2 * 0.1 ** 2))


def operator(p=2, n=(8, 8), tau=0.01, mat=el.MaterialParams(), **kw):
    return el.build_elastic_operator([make_uniform_space(p, n[0]), make_uniform_space(p, n[1])],
                                     mat, tau, **kw)


def shear(k, mat, t):
    c = np.cos(k * np.pi * np.sqrt(2 * mat.mu / mat.rho) * t)
    return (lambda X, Y: np.cos(k * np.pi * X) * np.sin(k * np.pi * Y) * c,
            lambda X, Y: -np.sin(k * np.pi * X) * np.cos(k * np.pi * Y) * c)


def test_material_validation():
    for bad in [(0, 1, 1), (1, 0, 1), (1, 1, -1)]:
        with pytest.raises(ValueError):
            el.MaterialParams(*bad)


def test_operator_preconditions():
    with pytest.raises(ValueError):
        operator(p=0)
    with pytest.raises(ValueError):
        operator(tau=0.0)
    with pytest.raises(ValueError):
        el.build_elastic_operator([make_uniform_space(2, 3)] * 3, el.MaterialParams(), 0.1)


@pytest.mark.parametrize("p,n", [(1, (2, 2)), (2, (3, 4)), (3, (4, 3))])
def test_blocks_match_weak_form(p, n):
    op = operator(p, n, mat=MAT)
    ref = elasticity_weak_form(p, n, MAT.mu, MAT.lam)
    assert np.abs(op.dense() - ref).max() <= 1e-12 * np.abs(ref).max()


def test_dense_operator_symmetric():
    Y = operator(1, (2, 2), mat=MAT).dense()
    assert np.abs(Y - Y.T).max() <= 1e-12


def test_off_diagonal_block_without_lambda():
    op = operator(2, (3, 4), mat=el.MaterialParams(1.0, 1.0, 0.0))
    Bx, By = gram(2, 3, 1, 0), gram(2, 4, 1, 0)
    np.testing.assert_allclose(op.dense_block(0, 1), kron_xfast([Bx.T, By]), atol=1e-13)
    np.testing.assert_allclose(op.dense_block(1, 0), kron_xfast([Bx, By.T]), atol=1e-13)


def test_literal_blocks_differ_from_weak_form():
    op = operator(2, (3, 3), mat=MAT, literal=True)
    assert np.abs(op.dense() - elasticity_weak_form(2, (3, 3), MAT.mu, MAT.lam)).max() > 0.1


def test_triangular_parts_sum_to_operator():
    op = operator(2, (3, 4), mat=MAT)
    Y1, Y2 = op.dense("lower"), op.dense("upper")
    np.testing.assert_allclose(Y1 + Y2, op.dense(), atol=1e-13, rtol=0)
    half = op.dims[0] * op.dims[1]
    np.testing.assert_array_equal(Y1[:half, half:], 0)
    np.testing.assert_array_equal(Y2[half:, :half], 0)
    np.testing.assert_allclose(Y1[:half, :half], 0.5 * op.dense_block(0, 0))
    np.testing.assert_allclose(Y2[half:, half:], 0.5 * op.dense_block(1, 1))


def test_rigid_motions_in_kernel():
    op = operator(2, (5, 4), mat=MAT)
    for comp in (0, 1):
        U = np.zeros((2,) + op.dims)
        U[comp] = 1.0
        assert np.abs(op.apply(U)).max() < 1e-11
    # infinitesimal rotation (-y, x) is reproduced exactly by quadratic splines
    gx = make_uniform_space(2, 5).greville()
    gy = make_uniform_space(2, 4).greville()
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    assert np.abs(op.apply(np.stack([-Y, X]))).max() < 1e-11


def test_applies_match_dense():
    op = operator(2, (4, 3), mat=MAT)
    U = np.random.default_rng(0).standard_normal((2,) + op.dims)
    v = flatten(U)
    np.testing.assert_allclose(flatten(op.apply(U)), op.dense() @ v, atol=1e-12)
    np.testing.assert_allclose(flatten(op.apply_lower(U)), op.dense("lower") @ v, atol=1e-12)
    np.testing.assert_allclose(flatten(op.apply_upper(U)), op.dense("upper") @ v, atol=1e-12)


def test_split_solves_invert_their_operators():
    op = operator(2, (4, 5), tau=0.1, mat=MAT)
    R = np.random.default_rng(1).standard_normal((2,) + op.dims)
    np.testing.assert_allclose(op.apply_S1(op.solve_S1(R)), R, atol=1e-11)
    np.testing.assert_allclose(op.apply_S2(op.solve_S2(R)), R, atol=1e-11)


def test_split_factors_are_spd():
    op = operator(2, (4, 4), tau=0.5, mat=MAT)
    for i in (0, 1):
        for f in op.split[i].factors:
            assert np.linalg.eigvalsh(f.to_dense()).min() > 0


@pytest.mark.parametrize("tau", [0.1, 0.05])
def test_splitting_defect_is_tau4_cross_term(tau):
    op = operator(2, (3, 3), tau=tau, mat=MAT)
    M = kron_xfast([gram(2, 3, 0, 0)] * 2)
    K = gram(2, 3, 1, 1)
    a = tau ** 2 / (4 * MAT.rho) * MAT.p_modulus
    b = tau ** 2 / (4 * MAT.rho) * MAT.mu
    defect = op.dense_split_diag(0) - (MAT.rho * M + 0.25 * tau ** 2 * op.dense_block(0, 0))
    np.testing.assert_allclose(defect, MAT.rho * a * b * kron_xfast([K, K]), atol=1e-13)


def test_zero_data_stays_zero():
    op = operator()
    st = el.ElasticState.zeros(op.dims)
    assert not el.predictor_step(st, op).any()
    st = el.step(st, op)
    assert not st.U.any()
    assert not el.bootstrap_first_step(np.zeros((2,) + op.dims), None, op).U.any()


def test_translation_preserved():
    op = operator()
    U0 = np.zeros((2,) + op.dims)
    U0[1] = 0.7
    st = el.bootstrap_first_step(U0, None, op)
    np.testing.assert_allclose(st.U, U0, atol=1e-12)
    np.testing.assert_allclose(el.predictor_step(st, op), U0, atol=1e-12)
    for _ in range(3):
        st = el.step(st, op)
    np.testing.assert_allclose(st.U, U0, atol=1e-12)


def test_predictor_matches_dense_unsplit_solve():
    ratios = []
    for tau in (0.02, 0.01):
        op = operator(2, (8, 8), tau=tau)
        U0 = el.project_displacement(op, gaussian, None)
        st = el.bootstrap_first_step(U0, None, op)
        Ut = el.predictor_step(st, op)
        M, Y1, Y2 = op.dense_mass(), op.dense("lower"), op.dense("upper")
        U, Um = flatten(st.U), flatten(st.U_prev)
        lhs = M / tau ** 2 + 0.5 * Y1
        rhs = M @ (2 * U - Um) / tau ** 2 - 0.5 * Y1 @ Um - Y2 @ U
        ref = np.linalg.solve(lhs, rhs)
        ratios.append(np.linalg.norm(flatten(Ut) - ref) / np.linalg.norm(ref))
    assert ratios[1] <= 5 * 0.01 ** 2
    assert ratios[0] / ratios[1] >= 3.5


def test_step_satisfies_generalized_recursion():
    op = operator(2, (4, 5), tau=0.05, mat=MAT)
    rng = np.random.default_rng(2)
    st = el.ElasticState(rng.standard_normal((2,) + op.dims), rng.standard_normal((2,) + op.dims))
    new = el.step(st, op)
    # D (U' - 2U + U^-) / tau^2 + Y U = 0
    res = op.apply_D((new.U - 2 * st.U + st.U_prev) / op.tau ** 2) + op.apply(st.U)
    assert np.abs(res).max() < 1e-9 * np.abs(op.apply(st.U)).max()


def test_sigma_quarter_reproduces_predictor_corrector_equations():
    # unsplit version of the two stages with sigma = 1/4 against the dense equations
    op = operator(2, (3, 3), tau=0.1, mat=MAT)
    rng = np.random.default_rng(3)
    st = el.ElasticState(rng.standard_normal((2,) + op.dims), rng.standard_normal((2,) + op.dims))
    M, Y1, Y2 = MAT.rho * op.dense_mass(), op.dense("lower"), op.dense("upper")
    tau = op.tau
    U, Um = flatten(st.U), flatten(st.U_prev)
    # replace the split diagonal blocks by their dense versions to isolate the stage algebra
    S1 = M + 0.5 * tau ** 2 * Y1
    S2 = M + 0.5 * tau ** 2 * Y2
    Ut = np.linalg.solve(M / tau ** 2 + 0.5 * Y1, M @ (2 * U - Um) / tau ** 2 - 0.5 * Y1 @ Um - Y2 @ U)
    Un = np.linalg.solve(M / tau ** 2 + 0.5 * Y2,
                         M @ (2 * U - Um) / tau ** 2 - 0.5 * Y1 @ (Ut + Um) - 0.5 * Y2 @ Um)
    # increment form with the same stage operators
    wt = np.linalg.solve(S1, -(Y1 + Y2) @ U)
    w = np.linalg.solve(S2, M @ wt)
    np.testing.assert_allclose(2 * U - Um + tau ** 2 * wt, Ut, atol=1e-10)
    np.testing.assert_allclose(2 * U - Um + tau ** 2 * w, Un, atol=1e-10)


def test_bootstrap_is_third_order_for_manufactured_mode():
    mat = el.MaterialParams()
    errs = []
    for tau in (0.04, 0.02, 0.01):
        op = operator(3, (32, 32), tau=tau, mat=mat)
        U1 = el.bootstrap_first_step(el.project_displacement(op, *shear(1, mat, 0)), None, op).U
        d = U1 - el.project_displacement(op, *shear(1, mat, tau))
        errs.append(np.sqrt(np.vdot(d, op.apply_mass(d))))
    assert errs[0] / errs[1] >= 7 and errs[1] / errs[2] >= 7


def test_star_norm_trivial_cases():
    op = operator()
    assert el.star_norm(el.ElasticState.zeros(op.dims), op) == 0.0
    U = np.zeros((2,) + op.dims)
    U[0] = 1.0
    assert el.star_norm(el.ElasticState(U, U.copy()), op) < 1e-6
    with pytest.raises(ValueError):
        el.star_norm(el.ElasticState(U, U), op, variant="other")


def test_energy_variant_conserved_exactly():
    op = operator(2, (8, 8), tau=0.05, mat=MAT)
    rng = np.random.default_rng(4)
    st = el.bootstrap_first_step(rng.standard_normal((2,) + op.dims),
                                 rng.standard_normal((2,) + op.dims), op)
    e0 = el.star_norm(st, op, "energy")
    for _ in range(100):
        st = el.step(st, op)
        assert el.star_norm(st, op, "energy") <= e0 * (1 + 1e-12)


def test_scheme_norm_exceeds_conserved_energy_by_velocity_term():
    op = operator(2, (6, 6), tau=0.05, mat=MAT)
    rng = np.random.default_rng(5)
    st = el.ElasticState(rng.standard_normal((2,) + op.dims), rng.standard_normal((2,) + op.dims))
    v = (st.U - st.U_prev) / op.tau
    gap = el.star_norm(st, op, "scheme") ** 2 - el.star_norm(st, op, "energy") ** 2
    np.testing.assert_allclose(gap, 0.25 * op.tau ** 2 * np.vdot(v, op.apply(v)), rtol=1e-10)


def test_energy_drift_16():
    op = operator(2, (16, 16), tau=0.01)
    U0 = el.project_displacement(op, gaussian, None)
    st = el.initial_state(U0, None, op)
    e0 = el.energies(st, op)[2]
    st = el.bootstrap_first_step(U0, None, op)
    worst = abs(el.energies(st, op)[2] - e0) / e0
    for _ in range(99):
        st = el.step(st, op)
        worst = max(worst, abs(el.energies(st, op)[2] - e0) / e0)
    assert worst <= 1e-2


def test_shear_mode_time_convergence():
    mat = el.MaterialParams()
    taus = [0.02, 0.01, 0.005]
    errs = []
    for tau in taus:
        op = operator(3, (24, 24), tau=tau, mat=mat)
        st = el.bootstrap_first_step(el.project_displacement(op, *shear(1, mat, 0)), None, op)
        while st.n < int(round(0.5 / tau)):
            st = el.step(st, op)
        d = st.U - el.project_displacement(op, *shear(1, mat, st.t))
        errs.append(np.sqrt(np.vdot(d, op.apply_mass(d))))
    slope = np.polyfit(np.log(taus), np.log(errs), 1)[0]
    assert abs(slope - 2) <= 0.2


def _norm_history(sigma, variant, seed, steps=200):
    op = el.build_elastic_operator([make_uniform_space(2, 16)] * 2, el.MaterialParams(), 0.01,
                                   sigma=sigma)
    rng = np.random.default_rng(seed)
    st = el.bootstrap_first_step(rng.standard_normal((2,) + op.dims),
                                 rng.standard_normal((2,) + op.dims), op)
    out = [el.star_norm(st, op, variant)]
    for _ in range(steps):
        st = el.step(st, op)
        out.append(el.star_norm(st, op, variant))
    return np.array(out)


@pytest.mark.parametrize("sigma", [0.25, 0.5, 1.0])
def test_stability_witness_conserved_norm(sigma):
    for seed in range(3):
        n = _norm_history(sigma, "energy", seed)
        assert np.diff(n).max() <= 1e-8 * n[0]


@pytest.mark.parametrize("sigma", [0.25, 0.5, 1.0])
def test_printed_norm_is_not_monotone(sigma):
    # the printed norm lacks the -tau^2/4 velocity correction and oscillates
    n = _norm_history(sigma, "printed", 0, steps=50)
    assert np.diff(n).max() > 1e-4 * n[0]
