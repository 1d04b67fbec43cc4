"""Smoke test for the mtpgd extension module.

Build the module first, for example with
    maturin develop -m crates/python/Cargo.toml --release
or by copying target/release/libmtpgd.so next to this script as mtpgd.so.
"""

import math
import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import mtpgd  # noqa: E402


def check_return_map():
    mat_g = 210000.0 / (2.0 * 1.3)
    gamma = 250.0 / (math.sqrt(3.0) * mat_g)
    eps_p, ebar, sigma, dlam = mtpgd.return_map(np.array([0.0, 0.0, 0.0, gamma]), np.zeros(4), 0.0)
    assert abs(dlam - 45.0 / (3.0 * mat_g + 2000.0)) < 1e-12
    assert abs(ebar - dlam) < 1e-15
    assert abs(sum(eps_p[:3])) < 1e-14
    print(f"return map: dlambda = {dlam:.4e}, sigma_xy = {sigma[3]:.2f} MPa")


def check_decompose():
    tau = np.arange(20)
    h = np.concatenate([np.sin(2 * np.pi * tau / 20) * (1 + 0.5 * j) for j in range(10)])
    micro, macro, residuals = mtpgd.decompose(h, 20, 10, 1e-12)
    assert micro.shape == (1, 20) and macro.shape == (1, 10)
    assert residuals[-1] < 1e-12
    print(f"decompose: {micro.shape[0]} sub-mode, residual {residuals[-1]:.1e}")


def check_case():
    case = mtpgd.Case("dogbone_desk")
    assert case.n_nodes == 66 and case.n_elements == 50
    pgd = case.run(delta=1e-5, max_iters=200, anderson_depth=5)
    fe = case.solve_incremental(1e-8)
    assert pgd.converged
    u_pgd, u_fe = pgd.displacement(), fe.displacement()
    assert u_pgd.shape == (2 * case.n_nodes, len(case.times()))
    diff = np.linalg.norm(u_pgd - u_fe) / np.linalg.norm(u_fe)
    assert diff < 1e-3
    s_pgd, s_fe = pgd.probe(0.0, 0.0, "sigma_xx"), fe.probe(0.0, 0.0, "sigma_xx")
    probe_diff = np.linalg.norm(s_pgd - s_fe) / np.linalg.norm(s_fe)
    assert probe_diff < 1e-3
    print(
        f"dog-bone: {len(pgd.errors)} iterations, rank {pgd.rank}, "
        f"displacement difference {diff:.2e}, probe stress difference {probe_diff:.2e}"
    )
    try:
        pgd.probe(0.0, 9.0)
    except ValueError as e:
        print(f"outside probe rejected: {e}")
    else:
        raise AssertionError("probe outside the mesh was accepted")


if __name__ == "__main__":
    check_return_map()
    check_decompose()
    check_case()
    print("smoke test passed")
