"""The numba kernels and their numpy twins must agree."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_hermitian
from lindblad_lightcone import _jit
from lindblad_lightcone._jump_kernels import jump_sum_loops, jump_sum_vec
from lindblad_lightcone.linalg import hermitian_eigs, hermitian_eigvals
from lindblad_lightcone.linalg._eigh_kernels import tql_loops, tql_vec, tridiagonalize_loops, tridiagonalize_vec
from lindblad_lightcone.model import LatticeGeometry, build_kraus_family

LOOPS = (tridiagonalize_loops, tql_loops)
VEC = (tridiagonalize_vec, tql_vec)


@pytest.mark.parametrize("kind", ["dephasing", "directed_jump"])
def test_jump_sum_agree(kind, rng):
    geo = LatticeGeometry(6)
    fam = build_kraus_family(kind, 0.8, geo)
    a, b, c, d, coef = fam.entry_pairs
    rho = rng.standard_normal((geo.size, geo.size)) + 1j * rng.standard_normal((geo.size, geo.size))
    x = jump_sum_loops(rho, a, b, c, d, coef, np.empty_like(rho))
    y = jump_sum_vec(rho, a, b, c, d, coef, np.empty_like(rho))
    ref = sum(w @ rho @ w.conj().T for w in fam.dense())
    assert np.allclose(x, y, atol=1e-14) and np.allclose(x, ref, atol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 5, 17, 40])
def test_eigen_kernels_agree(n):
    a = random_hermitian(np.random.default_rng(n), n, scale=3.0)
    p, q = hermitian_eigs(a, kernels=LOOPS), hermitian_eigs(a, kernels=VEC)
    assert np.allclose(p.eigenvalues, q.eigenvalues, atol=1e-12)
    assert np.linalg.norm(a - q.reconstruct(), 2) <= 1e-11 * max(1.0, np.linalg.norm(a, 2))
    assert np.allclose(hermitian_eigvals(a, kernels=VEC), p.eigenvalues, atol=1e-12)


def test_backend_flag_in_process():
    assert _jit.backend_name() == ("numba" if _jit.USE_NUMBA else "numpy")


_PROBE = """
import json
import numpy as np
from lindblad_lightcone import _jit
from lindblad_lightcone.lightcone import velocity_operator
from lindblad_lightcone.dynamics import evolve, InitialState
from lindblad_lightcone.model import make_model
spec = make_model(8, 1.0, "directed_jump", 0.7)
rho = InitialState.at_site(spec.geometry, 1.5)
out = evolve(spec, rho, 1.0, 0.1)
print(json.dumps({"backend": _jit.backend_name(), "kappa": velocity_operator(spec).kappa,
                  "diag": np.real(np.diag(out.states[-1].matrix)).tolist()}))
"""


def _probe(disable):
    env = dict(os.environ)
    env.pop(_jit.DISABLE_JIT_ENV, None)
    if disable:
        env[_jit.DISABLE_JIT_ENV] = "1"
    proc = subprocess.run([sys.executable, "-c", _PROBE], capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def test_fallback_subprocess():
    plain, fallback = _probe(False), _probe(True)
    assert fallback["backend"] == "numpy" and plain["backend"] == "numba"
    assert fallback["kappa"] == pytest.approx(plain["kappa"], abs=1e-12)
    assert np.allclose(fallback["diag"], plain["diag"], atol=1e-12)
