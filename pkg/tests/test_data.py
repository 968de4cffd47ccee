import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from stagewise.data import (
    RawDataset,
    StandardizedProblem,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    load_dataset,
    population_signal_variance,
    read_table,
    save_dataset,
    standardize,
    write_csv,
)
from stagewise.errors import (
    ConfigError,
    MissingResponseColumnError,
    NonFiniteInputError,
    ParseError,
    ZeroColumnError,
)


def test_rescale_orthogonal_columns():
    prob = standardize(RawDataset([[2.0, 0.0], [0.0, 2.0]], [3.0, 1.0]), center=False)
    assert np.array_equal(prob.X, np.eye(2))
    assert np.array_equal(prob.column_scales, [2.0, 2.0])
    assert np.array_equal(prob.y, [3.0, 1.0])


def test_constant_column_vanishes_under_centering():
    with pytest.raises(ZeroColumnError):
        standardize(RawDataset([[1.0, 2.0], [1.0, 5.0], [1.0, 7.0]], [1.0, 2.0, 3.0]), center=True)


def test_scale_recorded_for_3_4_0_column():
    raw = RawDataset([[3.0, 1.0], [4.0, 0.0], [0.0, 5.0]], [1.0, 2.0, 3.0])
    prob = standardize(raw, center=False)
    # hand computation: norm of (3, 4, 0) is 5
    assert prob.column_scales[0] == pytest.approx(5.0, abs=1e-15)
    assert np.allclose(prob.X[:, 0], [0.6, 0.8, 0.0], atol=1e-15)


def test_centered_problem_invariants(small):
    assert np.allclose(np.linalg.norm(small.X, axis=0), 1.0, atol=1e-12)
    assert np.max(np.abs(small.X.mean(axis=0))) <= 1e-12
    assert abs(small.y.mean()) <= 1e-12


def test_problem_is_immutable(small):
    with pytest.raises(ValueError):
        small.X[0, 0] = 1.0
    with pytest.raises(AttributeError):
        small.y = None


def test_nonfinite_rejected():
    with pytest.raises(NonFiniteInputError):
        RawDataset([[1.0, np.nan]], [1.0])


def test_non_unit_columns_rejected():
    with pytest.raises(ConfigError):
        StandardizedProblem(np.array([[2.0], [0.0]]), [1.0, 1.0])


@settings(max_examples=40, deadline=None)
@given(arrays(float, (8, 3), elements=st.floats(-100, 100, allow_nan=False, width=64)),
       st.booleans())
def test_standardize_idempotent(X, center):
    X = X + np.arange(8)[:, None] * np.array([1.0, -2.0, 0.5])  # keep columns non-constant
    raw = RawDataset(X, np.arange(8.0))
    try:
        once = standardize(raw, center)
    except ZeroColumnError:
        return
    twice = standardize(RawDataset(once.X, once.y), center)
    assert np.max(np.abs(twice.X - once.X)) <= 1e-12
    assert np.max(np.abs(twice.y - once.y)) <= 1e-12


def test_uncorrelated_design():
    raw = generate_synthetic(SyntheticSpec(2000, 5, 0.0, 1.0, 2, seed=1)).data
    C = np.corrcoef(raw.X, rowvar=False)
    assert np.max(np.abs(C - np.eye(5))) < 0.15


def test_equicorrelated_design():
    raw = generate_synthetic(SyntheticSpec(2000, 5, 0.9, 1.0, 2, seed=2)).data
    C = np.corrcoef(raw.X, rowvar=False)
    off = C[~np.eye(5, dtype=bool)]
    assert np.all(np.abs(off - 0.9) <= 0.05)


def test_same_seed_bitwise_identical():
    spec = SyntheticSpec(40, 7, 0.5, 2.0, 3, seed=99)
    a, b = generate_synthetic(spec), generate_synthetic(spec)
    assert np.array_equal(a.data.X, b.data.X) and np.array_equal(a.data.y, b.data.y)


def test_gram_near_identity_when_uncorrelated():
    n = 4000
    prob = standardize(generate_synthetic(SyntheticSpec(n, 6, 0.0, 1.0, 2, seed=3)).data)
    G = prob.X.T @ prob.X
    assert np.max(np.abs(G - np.eye(6))) < 3 / np.sqrt(n) * 2


@pytest.mark.parametrize("rho,s", [(0.0, 5), (0.5, 5), (0.9, 10)])
def test_signal_variance_matches_population(rho, s):
    draw = generate_synthetic(SyntheticSpec(20000, 12, rho, 1.0, s, seed=4))
    emp = np.var(draw.data.X @ draw.beta_pop)
    theory = rho * s * s + (1 - rho) * s
    assert population_signal_variance(rho, s) == theory
    assert abs(emp - theory) <= 0.1 * theory
    assert draw.noise_var == pytest.approx(theory)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SyntheticSpec(10, 5, rho=1.0)
    with pytest.raises(ConfigError):
        SyntheticSpec(10, 5, snr=0.0)
    with pytest.raises(ConfigError):
        SyntheticSpec(10, 5, beta_pop_support=6)
    assert SyntheticSpec.eg_b().beta_pop_support == 10


def test_load_csv_basic(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("a,b,y\n1,2,3\n4,5,6\n7,8,9\n")
    raw = load_csv(f, "y")
    assert (raw.n, raw.p) == (3, 2)
    assert raw.column_names == ("a", "b")
    assert np.array_equal(raw.y, [3, 6, 9])
    assert np.array_equal(load_csv(f, 0).X[:, 0], [2, 5, 8])


def test_load_csv_nan_cell(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("a,b,y\n1,2,3\n4,NaN,6\n")
    with pytest.raises(ParseError) as err:
        load_csv(f, "y")
    assert err.value.row == 3 and err.value.column == "b"


def test_load_csv_errors(tmp_path):
    f = tmp_path / "d.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(MissingResponseColumnError):
        load_csv(f, "y")
    f.write_text("a,y\n1,2\n3\n")
    with pytest.raises(ParseError) as err:
        load_csv(f, "y")
    assert err.value.row == 3
    f.write_text("a,y\n1,abc\n")
    with pytest.raises(ParseError):
        load_csv(f, "y")


@settings(max_examples=30, deadline=None)
@given(arrays(float, (5, 3), elements=st.floats(-1e300, 1e300, allow_nan=False, width=64)))
def test_csv_round_trip_exact(tmp_path_factory, M):
    path = tmp_path_factory.mktemp("rt") / "m.csv"
    write_csv(path, ["a", "b", "c"], M.tolist())
    header, back = read_table(path)
    assert header == ["a", "b", "c"]
    assert np.array_equal(back, M)


def test_dataset_directory_round_trip(tmp_path):
    raw = generate_synthetic(SyntheticSpec(9, 4, 0.2, 1.0, 2, seed=5)).data
    save_dataset(raw, tmp_path)
    back = load_dataset(tmp_path)
    assert np.array_equal(back.X, raw.X) and np.array_equal(back.y, raw.y)


def test_scales_map_back_to_raw_units():
    raw = RawDataset([[3.0, 1.0], [4.0, 2.0], [0.0, 2.0]], [1.0, 2.0, 3.0])
    prob = standardize(raw, center=False)
    beta = np.array([0.3, -1.2])
    assert np.allclose(raw.X @ prob.to_raw_units(beta), prob.X @ beta)
