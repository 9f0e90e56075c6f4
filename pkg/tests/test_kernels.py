import numpy as np
import pytest

from nhje import kernels
from nhje.model import DriveProtocol

try:
    CY = kernels.get_backend("cython")
except ImportError:  # extension not built
    CY = None
PY = kernels.get_backend("python")

needs_ext = pytest.mark.skipif(CY is None, reason="compiled kernels not built")

PROTOS = [DriveProtocol.constant(0.03, 30), DriveProtocol.triangle(0.03, 0.06, 30),
          DriveProtocol.sin_detuning(0.12, 0.5, 30)]


def test_backend_name():
    assert kernels.BACKEND in ("python", "cython")
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@needs_ext
@pytest.mark.parametrize("proto", PROTOS, ids=lambda p: p.kind)
def test_ordered_products_parity(proto):
    code, a, b = proto.kernel_args()
    marks = np.array([0, 1, 17, 500, 1500], dtype=np.int64)
    args = (code, a, b, proto.T, 0.02, 0.7, 0.0, proto.T / 1500, marks)
    np.testing.assert_allclose(CY.ordered_products(*args), PY.ordered_products(*args), atol=1e-15, rtol=0)


@needs_ext
@pytest.mark.parametrize("proto", PROTOS, ids=lambda p: p.kind)
def test_lindblad_parity(proto):
    code, a, b = proto.kernel_args()
    rho = np.zeros((3, 3), dtype=complex)
    rho[:2, :2] = [[0.6, 0.2 - 0.1j], [0.2 + 0.1j, 0.4]]
    args = (code, a, b, proto.T, 0.02, rho, 0.0, proto.T / 300, 300)
    np.testing.assert_allclose(CY.lindblad_rk4(*args), PY.lindblad_rk4(*args), atol=1e-14, rtol=0)


@pytest.mark.parametrize("mod", [PY] + ([CY] if CY is not None else []), ids=lambda m: m.BACKEND)
def test_marks_start_at_identity(mod):
    out = mod.ordered_products(0, 0.03, 0.0, 10.0, 0.02, 0.0, 0.0, 0.01, np.array([0, 0], dtype=np.int64))
    np.testing.assert_array_equal(out, np.broadcast_to(np.eye(2), (2, 2, 2)))


def test_pure_python_env(monkeypatch):
    import importlib

    monkeypatch.setenv("NHJE_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("NHJE_PURE_PYTHON")
        importlib.reload(kernels)
