import math

import numpy as np
import pytest

import plrsq


def diag(*values):
    return np.diag(np.array(values, dtype=float))


def test_distance_and_maps():
    a, b = np.eye(2), diag(math.e**2, 1.0)
    assert plrsq.geo_distance(a, b) == pytest.approx(2.0)
    v = plrsq.log_map(a, b)
    assert np.allclose(plrsq.exp_map(a, v), b)
    assert np.allclose(plrsq.dist_sq_gradient(a, b), -2 * v)


def test_karcher_midpoint():
    mean = plrsq.karcher_mean(np.stack([diag(1, 4), diag(4, 1)]))
    assert np.allclose(mean, diag(2, 2), atol=1e-6)


def test_kappa():
    assert plrsq.kappa(0.6925, 4) == pytest.approx(0.59)


def test_train_predict_and_save(tmp_path):
    splits = plrsq.gen_synth("SynI", seed=3, n=4, instances_per_class=15)
    x, y = splits["train"]
    assert x.shape == (60, 4, 4)
    cfg = plrsq.TrainConfig()
    cfg.epochs = 10
    cfg.rng_seed = 1
    model, history = plrsq.train(x, y, 4, cfg, method="plrsq-const")
    assert len(history) == 10
    assert model.prototypes.shape == (4, 4, 4)
    assert sum(model.predict_proba(x[0])) == pytest.approx(1.0)

    tx, ty = splits["test"]
    pred = model.predict(tx)
    assert np.mean(np.array(pred) == np.array(ty)) > 0.5

    path = tmp_path / "m.model"
    plrsq.save_model(str(path), model, method="plrsq-const", seed=1)
    assert plrsq.load_model(str(path)).predict(tx) == pred

    mdrm = plrsq.mdrm_train(x, y, 4)
    assert len(mdrm.predict(tx)) == len(ty)


def test_errors_are_categorized():
    with pytest.raises(plrsq.Error, match="validation"):
        plrsq.geo_distance(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2))
    cfg = plrsq.TrainConfig()
    with pytest.raises(plrsq.Error, match="config"):
        cfg.annealing = "fast"
