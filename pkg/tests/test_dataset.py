import numpy as np
import pytest

from cfcp import (
    CsvParseError,
    Dataset,
    InvalidParameterError,
    SynthClassification,
    SynthRegression,
    UnsupportedOperationError,
    attach_counterfactuals,
    load_csv,
    make_rng,
    save_csv,
    split,
)


def _reg(n=100, seed=1):
    scm = SynthRegression()
    return scm, scm.generate(n, make_rng(seed, "data"))


def test_split_partitions_rows():
    ds = Dataset(X=np.arange(10.0), A=np.zeros(10, int), Y=np.arange(10.0))
    tr, ca, te = split(ds, 6, 2, 2, make_rng(1, "split"))
    assert (len(tr), len(ca), len(te)) == (6, 2, 2)
    allx = np.concatenate([tr.X[:, 0], ca.X[:, 0], te.X[:, 0]])
    assert np.array_equal(np.sort(allx), np.arange(10.0))


def test_split_is_deterministic_and_label_sensitive():
    _, ds = _reg(200)
    a = split(ds, 100, 50, 50, make_rng(1, "split"))[0].X
    b = split(ds, 100, 50, 50, make_rng(1, "split"))[0].X
    c = split(ds, 100, 50, 50, make_rng(1, "other"))[0].X
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_split_rejects_oversized_request():
    _, ds = _reg(10)
    with pytest.raises(InvalidParameterError):
        split(ds, 6, 3, 3, make_rng(1, "s"))


def test_oracle_counterfactuals_keep_factual_rows():
    scm, ds = _reg(300)
    ds = attach_counterfactuals(ds, scm)
    assert sorted(ds.CF) == [0, 1]
    for i in range(len(ds)):
        assert np.array_equal(ds.CF[ds.A[i]][i], ds.X[i])


def test_noisy_then_oracle_restores_factual_rows():
    scm, ds = _reg(300)
    noisy = attach_counterfactuals(ds, scm, 0.4, make_rng(1, "noise"))
    fact = np.where(ds.A == 1, noisy.CF[1][:, 0], noisy.CF[0][:, 0])
    assert not np.allclose(fact, ds.X[:, 0])
    clean = attach_counterfactuals(noisy, scm, 0.0)
    fact = np.where(ds.A == 1, clean.CF[1][:, 0], clean.CF[0][:, 0])
    assert np.array_equal(fact, ds.X[:, 0])


def test_noisy_counterfactuals_need_rng_and_nonnegative_sigma():
    scm, ds = _reg(20)
    with pytest.raises(InvalidParameterError):
        attach_counterfactuals(ds, scm, 0.4)
    with pytest.raises(InvalidParameterError):
        attach_counterfactuals(ds, scm, -0.1, make_rng(1, "n"))


def test_views_under_oracle_counterfactuals_share_the_slot_multiset():
    rng = make_rng(2, "scm")
    scm = SynthClassification.sample(rng)
    ds = attach_counterfactuals(scm.generate(400, rng), scm)
    base = ds.view(None)
    for v in ds.domain:
        view = ds.view(v)
        assert np.all(view.A == v)
        for s0, s1 in zip(base.slots, view.slots):
            assert np.array_equal(s0, s1)
        own = ds.A == v
        assert np.array_equal(view.X[~own], ds.CF[v][~own])
        assert np.array_equal(view.X[own], ds.X[own])


def test_view_requires_counterfactuals():
    _, ds = _reg(10)
    with pytest.raises(UnsupportedOperationError):
        ds.view(1)


def test_rejects_inconsistent_rows():
    with pytest.raises(InvalidParameterError):
        Dataset(X=np.zeros((3, 1)), A=np.zeros(2), Y=np.zeros(3))


def test_csv_round_trip_regression(tmp_path):
    scm, ds = _reg(100)
    ds = attach_counterfactuals(ds, scm)
    path = tmp_path / "reg.csv"
    save_csv(ds, path)
    back = load_csv(path)
    assert back.task == "regression"
    for name in ("X", "A", "Y", "U"):
        assert np.array_equal(getattr(back, name), getattr(ds, name)), name
    assert back.domain == ds.domain
    for a in ds.domain:
        assert np.array_equal(back.CF[a], ds.CF[a])


def test_csv_round_trip_classification(tmp_path):
    rng = make_rng(3, "scm")
    scm = SynthClassification.sample(rng)
    ds = attach_counterfactuals(scm.generate(80, rng), scm)
    path = tmp_path / "clf.csv"
    save_csv(ds, path)
    back = load_csv(path, K=10)
    assert back.task == "classification" and back.K == 10
    assert np.array_equal(back.Y, ds.Y)
    assert np.array_equal(back.X, ds.X)


def test_csv_without_counterfactuals(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("x0,x1,a,y\n0.5,1,0,1.5\n0.1,2,1,2.5\n")
    ds = load_csv(path)
    assert ds.CF is None and ds.U is None and not ds.has_cf
    with pytest.raises(UnsupportedOperationError):
        attach_counterfactuals(ds)


def test_csv_three_valued_attribute(tmp_path):
    path = tmp_path / "a3.csv"
    path.write_text("x0,a,y\n1,2,0.5\n2,0,1.5\n3,1,2.5\n4,2,0.1\n")
    assert load_csv(path).domain == (0, 1, 2)


def test_csv_schema_renames_columns(tmp_path):
    path = tmp_path / "law.csv"
    path.write_text("lsat,gpa,race,fya\n30,3.1,1,0.25\n40,3.5,0,-0.5\n")
    ds = load_csv(path, schema={"lsat": "x0", "gpa": "x1", "race": "a", "fya": "y"})
    assert ds.d == 2 and ds.task == "regression"
    assert np.array_equal(ds.A, [1, 0])


def test_csv_errors_name_row_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x0,a,y\n1,0,1\n2,zero,1\n")
    with pytest.raises(CsvParseError, match=r"row 3.*'a'"):
        load_csv(path)
    path.write_text("x0,y\n1,1\n")
    with pytest.raises(CsvParseError, match="'a'"):
        load_csv(path)
    path.write_text("x0,a,y\n1,0\n")
    with pytest.raises(CsvParseError, match="row 2"):
        load_csv(path)
    path.write_text("x0,a,y,cf_0_x0\n1,0,1,1\n2,1,0,1\n")
    with pytest.raises(CsvParseError, match="a=1"):
        load_csv(path)


def test_csv_noise_is_added_to_embeddings(tmp_path):
    path = tmp_path / "emb.csv"
    path.write_text("x0,a,y,cf_0_x0,cf_1_x0\n1,0,1,1,3\n2,1,0,0,2\n")
    ds = load_csv(path)
    noisy = attach_counterfactuals(ds, None, 0.5, make_rng(1, "n"))
    assert not np.array_equal(noisy.CF[0], ds.CF[0])
    clean = attach_counterfactuals(noisy, None, 0.0)
    assert np.array_equal(clean.CF[0], ds.CF[0])
