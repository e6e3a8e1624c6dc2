import numpy as np
import pytest

from texsom import _backend, glcm, isom, som

BACKENDS = ["python"] + (["cython"] if _backend.compiled_kernels is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    k = _backend.python_kernels if request.param == "python" else _backend.compiled_kernels
    for mod in (glcm, som, isom):
        monkeypatch.setattr(mod, "kernels", k)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        title = marker.args[0]
        callspec = getattr(item, "callspec", None)
        if callspec is not None and "backend" in callspec.params:
            title += f" [{callspec.params['backend']} backend]"
        _acceptance.append((title, rep.passed, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for title, passed, dur in _acceptance:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {title}  ({dur:.2f}s)")


def make_texture(rng, abnormal, size=48):
    """Smooth low-contrast texture for class 0, speckled high-contrast for class 1."""
    base = rng.normal(0, 1, (size // 4 + 1, size // 4 + 1))
    smooth = np.kron(base, np.ones((4, 4)))[:size, :size]
    img = 110 + 12 * smooth
    if abnormal:
        img = img + rng.normal(0, 40, (size, size))
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


@pytest.fixture
def pgm_corpus(tmp_path):
    """Build ``(image_dir, labels_csv)`` with the given class sizes."""
    from texsom.dataset import save_pgm

    def build(n_normal=6, n_abnormal=6, size=48, seed=0):
        rng = np.random.default_rng(seed)
        img_dir = tmp_path / "images"
        img_dir.mkdir(exist_ok=True)
        rows = ["id,label"]
        for i in range(n_normal + n_abnormal):
            abnormal = i >= n_normal
            ident = f"mdb{i:03d}"
            save_pgm(img_dir / f"{ident}.pgm", make_texture(rng, abnormal, size), binary=i % 2 == 0)
            rows.append(f"{ident},{'abnormal' if abnormal else 'normal'}")
        labels = tmp_path / "labels.csv"
        labels.write_text("\n".join(rows) + "\n")
        return img_dir, labels

    return build
