import math
import os
import subprocess
import sys

import numpy as np
import pytest

from rmtkernels import _backend, _fallback

COMPILED = "compiled" in _backend.available()
needs_compiled = pytest.mark.skipif(not COMPILED, reason="compiled core not built")


def active_backend(env_value):
    env = {k: v for k, v in os.environ.items() if k != "RMT_PURE_PYTHON"}
    if env_value is not None:
        env["RMT_PURE_PYTHON"] = env_value
    proc = subprocess.run([sys.executable, "-c", "import rmtkernels; print(rmtkernels.backend)"],
                          capture_output=True, text=True, env=env, check=True)
    return proc.stdout.strip()


class TestSelection:
    def test_fallback_forced(self):
        assert active_backend("1") == "python"

    @needs_compiled
    @pytest.mark.parametrize("value", [None, "0", ""])
    def test_compiled_by_default(self, value):
        assert active_backend(value) == "compiled"

    def test_get(self):
        assert _backend.get("python") is _fallback
        assert _backend.get() is _backend.kernels
        with pytest.raises(ValueError):
            _backend.get("fortran")

    def test_available(self):
        assert _backend.available()[-1] == "python"


@needs_compiled
class TestAgreement:
    core = staticmethod(lambda: _backend.get("compiled"))

    def test_loggamma(self):
        rng = np.random.default_rng(1)
        z = rng.uniform(-40, 40, 2000) + 1j * rng.uniform(-60, 60, 2000)
        z = np.concatenate([z, [-3.0, 0.0, -2.5, 1e3 + 1j, 0.5]])
        a, pa = self.core().loggamma_array(z)
        b, pb = _fallback.loggamma_array(z)
        assert np.array_equal(pa, pb)
        ok = ~pa
        assert np.max(np.abs(a[ok] - b[ok]) / np.maximum(1.0, np.abs(b[ok]))) <= 1e-12

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 3.0])
    def test_laguerre(self, alpha):
        x = np.concatenate([[0.0], np.linspace(0.01, 600, 300)])
        lg = math.lgamma(alpha + 1)
        a, oa = self.core().laguerre_table(150, alpha, x, lg)
        b, ob = _fallback.laguerre_table(150, alpha, x, lg)
        assert not oa and not ob
        assert np.max(np.abs(a - b)) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 7, 60])
    def test_householder(self, n):
        rng = np.random.default_rng(n)
        x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        h = x @ x.conj().T
        da, ea = self.core().householder_tridiagonal(h)
        db, eb = _fallback.householder_tridiagonal(h)
        # the reductions may differ by signs of the off-diagonal
        assert np.allclose(da, db, atol=1e-10 * n)
        assert np.allclose(np.abs(ea), np.abs(eb), atol=1e-10 * n)

    def test_tridiagonal(self):
        rng = np.random.default_rng(3)
        d, e = rng.normal(size=80), rng.normal(size=79)
        va, fa = self.core().tridiagonal_eigenvalues(d, e)
        vb, fb = _fallback.tridiagonal_eigenvalues(d, e)
        ref = np.linalg.eigvalsh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
        assert not fa and not fb
        assert np.allclose(va, ref, atol=1e-12) and np.allclose(vb, ref, atol=1e-12)
