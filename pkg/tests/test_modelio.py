import numpy as np
import pytest

from texsom.errors import ParseError
from texsom.features import MinMaxScaler
from texsom.isom import IsomClassifier
from texsom.modelio import dump_model, load_model, parse_model, save_model
from texsom.som import SomClassifier, TrainConfig


def fitted(kind, rng):
    X = np.vstack([rng.normal(0.2, 0.05, (20, 4)), rng.normal(0.8, 0.05, (20, 4))])
    y = np.repeat([0, 1], 20)
    cls = IsomClassifier if kind == "isom" else SomClassifier
    return cls(3, 4, TrainConfig(epochs=5)).fit(X, y), X


@pytest.mark.parametrize("kind", ["som", "isom"])
def test_roundtrip(tmp_path, rng, kind):
    model, X = fitted(kind, rng)
    scaler = MinMaxScaler().fit(X)
    p = tmp_path / "m.txt"
    save_model(p, model, scaler)
    back, sc = load_model(p)
    assert back.kind == kind
    np.testing.assert_allclose(back.grid.weights, model.grid.weights, rtol=5e-9, atol=0)
    if kind == "isom":
        np.testing.assert_array_equal(back.grid.wcc, model.grid.wcc)
    else:
        np.testing.assert_array_equal(back.labeling, model.labeling)
    np.testing.assert_array_equal(back.predict(X), model.predict(X))
    np.testing.assert_allclose(sc.data_min, scaler.data_min, rtol=5e-9)
    assert dump_model(back, sc) == dump_model(model, scaler)


def test_no_scaler(rng):
    model, _ = fitted("isom", rng)
    back, sc = parse_model(dump_model(model))
    assert sc is None and back.n_classes == 2


def test_header_fields(rng):
    model, _ = fitted("isom", rng)
    lines = dump_model(model).splitlines()
    assert lines[:6] == ["texsom-model 1", "kind isom", "rows 3", "cols 4", "dim 4", "classes 2"]
    assert lines[-1] == "end"
    assert len([l for l in lines if l.startswith("node ")]) == 12


@pytest.mark.parametrize("mutate", [
    lambda t: t.replace("texsom-model 1", "texsom-model 9"),
    lambda t: t.replace("kind isom", "kind lvq"),
    lambda t: t.replace("rows 3", "rows x"),
    lambda t: t.replace("\nend\n", "\n"),
    lambda t: t.replace(" wcc ", " wxx ", 1),
    lambda t: "\n".join(t.splitlines()[:9]),
    lambda t: t.replace("weights 0", "weights nan", 1).replace("weights 1", "weights nan", 1),
    lambda t: "",
])
def test_corrupt(rng, mutate):
    model, _ = fitted("isom", rng)
    text = mutate(dump_model(model))
    with pytest.raises(ParseError):
        parse_model(text)
