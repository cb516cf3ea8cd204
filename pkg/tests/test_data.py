import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from embedviz.data import (
    Dataset,
    generate_synthetic,
    load_csv,
    normalize,
    round_half_up,
    save_csv,
    stratified_split,
)
from embedviz.errors import (
    BadFraction,
    BadLabel,
    MissingFile,
    NonNumericFeature,
    PreconditionError,
    SingleClass,
)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_rows_in_file_order(tmp_path):
    p = write(tmp_path, "a,b,label\n1,2,-1\n3,4,-1\n5,6,1\n")
    ds = load_csv(p)
    assert (ds.n, ds.d) == (3, 2)
    assert ds.labels.tolist() == [-1, -1, 1]
    assert ds.samples[2].tolist() == [5.0, 6.0]
    assert ds.feature_names == ("a", "b")


def test_load_csv_label_by_index(tmp_path):
    p = write(tmp_path, "label,a\n1,0.5\n-1,0.25\n")
    ds = load_csv(p, label_column=0)
    assert ds.labels.tolist() == [1, -1]
    assert ds.samples.ravel().tolist() == [0.5, 0.25]


def test_load_csv_bad_label(tmp_path):
    p = write(tmp_path, "a,label\n1,1\n2,0\n")
    with pytest.raises(BadLabel) as e:
        load_csv(p)
    assert e.value.row == 2


def test_load_csv_non_numeric(tmp_path):
    p = write(tmp_path, "a,b,label\n1,abc,1\n")
    with pytest.raises(NonNumericFeature) as e:
        load_csv(p)
    assert e.value.row == 1


def test_load_csv_missing(tmp_path):
    with pytest.raises(MissingFile):
        load_csv(tmp_path / "nope.csv")


def test_csv_round_trip(tmp_path, small_ds):
    p = tmp_path / "rt.csv"
    save_csv(small_ds, p)
    back = load_csv(p)
    assert np.array_equal(back.samples, small_ds.samples)
    assert np.array_equal(back.labels, small_ds.labels)


def test_dataset_is_read_only(small_ds):
    with pytest.raises(ValueError):
        small_ds.samples[0, 0] = 1.0


def test_dataset_rejects_nan():
    with pytest.raises(NonNumericFeature):
        Dataset([[0.0], [np.nan]], [1, -1])


def test_dataset_rejects_length_mismatch():
    with pytest.raises(PreconditionError):
        Dataset([[0.0], [1.0]], [1])


@pytest.mark.parametrize(
    "col, want",
    [([0, 2, 4], [0, 0.5, 1]), ([5, 5, 5], [0, 0, 0]), ([-1, 1], [0, 1])],
)
def test_normalize_examples(col, want):
    ds = Dataset(np.array(col, float)[:, None], [1] + [-1] * (len(col) - 1))
    assert normalize(ds).samples.ravel().tolist() == want


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 4)), elements=finite))
def test_normalize_range_and_idempotence(X):
    y = np.where(np.arange(X.shape[0]) % 2 == 0, 1, -1)
    once = normalize(Dataset(X, y))
    assert np.all((once.samples >= 0) & (once.samples <= 1))
    assert np.array_equal(normalize(once).samples, once.samples)
    assert np.array_equal(once.labels, y)


def test_round_half_up():
    assert round_half_up(265.75) == 266
    assert round_half_up(2.5) == 3
    assert round_half_up(2.4999) == 2


def test_split_counts_at_full_scale():
    # 1063 positives and 6937 negatives; 0.25 of each, rounded half up
    y = np.r_[np.ones(1063), -np.ones(6937)].astype(int)
    ds = Dataset(np.zeros((8000, 1)), y)
    sp = stratified_split(ds, 0.25, seed=0)
    assert sp.test.n_positive == 266
    assert sp.test.n_negative == 1734
    assert sp.train.n_positive == 797
    assert sp.train.n_negative == 5203


def test_split_deterministic(small_ds):
    a = stratified_split(small_ds, 0.3, seed=7)
    b = stratified_split(small_ds, 0.3, seed=7)
    assert np.array_equal(a.test_index, b.test_index)
    assert np.array_equal(a.train.samples, b.train.samples)


def test_split_single_class():
    ds = Dataset(np.zeros((5, 1)), -np.ones(5, int))
    with pytest.raises(SingleClass):
        stratified_split(ds, 0.25, 0)


@settings(max_examples=60, deadline=None)
@given(
    n_pos=st.integers(2, 40),
    n_neg=st.integers(2, 80),
    frac=st.floats(0.05, 0.95),
    seed=st.integers(0, 2**31),
)
def test_split_partition_and_stratification(n_pos, n_neg, frac, seed):
    y = np.r_[np.ones(n_pos), -np.ones(n_neg)].astype(int)
    ds = Dataset(np.arange(y.size, dtype=float)[:, None], y)
    sp = stratified_split(ds, frac, seed)
    ids = np.concatenate([sp.train.row_ids, sp.test.row_ids])
    assert sorted(ids.tolist()) == list(range(y.size))
    assert np.intersect1d(sp.train.row_ids, sp.test.row_ids).size == 0
    overall = n_pos / y.size
    for part in (sp.train, sp.test):
        assert abs(part.n_positive - overall * part.n) <= 1 + 1e-9


def test_synthetic_full_scale_count():
    ds = generate_synthetic(8000, 49, 0.1329, 3.0, seed=1)
    assert ds.n_positive == 1063
    assert ds.n == 8000 and ds.d == 49


def test_synthetic_bitwise_reproducible():
    a = generate_synthetic(200, 5, 0.2, 2.0, seed=4)
    b = generate_synthetic(200, 5, 0.2, 2.0, seed=4)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert np.array_equal(a.labels, b.labels)


def test_synthetic_separation_zero_classes_alike():
    ds = generate_synthetic(4000, 2, 0.2, 0.0, seed=2, n_components=1)
    mp = ds.samples[ds.labels == 1].mean(axis=0)
    mn = ds.samples[ds.labels == -1].mean(axis=0)
    assert np.linalg.norm(mp - mn) < 0.2


def test_synthetic_separation_moves_means():
    ds = generate_synthetic(4000, 10, 0.2, 4.0, seed=2, n_components=1)
    mp = ds.samples[ds.labels == 1].mean(axis=0)
    mn = ds.samples[ds.labels == -1].mean(axis=0)
    assert abs(np.linalg.norm(mp - mn) - 4.0) < 0.3


@pytest.mark.parametrize("frac", [0.6, 0.0, 0.5, -0.1])
def test_synthetic_bad_fraction(frac):
    with pytest.raises(BadFraction):
        generate_synthetic(100, 2, frac, 1.0, seed=0)


def test_synthetic_too_small():
    with pytest.raises(PreconditionError):
        generate_synthetic(3, 2, 0.2, 1.0, seed=0)
