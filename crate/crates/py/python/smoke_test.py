"""Smoke test for the mellin extension module.

Build and place the module next to this file first:

    cargo build --release -p mellin-py --features extension-module
    cp target/release/libmellin.so crates/py/python/mellin.so
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import mellin  # noqa: E402


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    expo = mellin.PathwayModel.gen_gamma(1.0)
    assert close(expo.pdf(2.0), math.exp(-2.0), 1e-15)
    assert expo.strip() == (0.0, math.inf)

    ratio = mellin.ConvolutionSpec.ratio(expo, expo)
    assert ratio.case == "P3_1"
    assert ratio.transform() == "Γ(s)Γ(2−s)·u^{−s}"
    assert ratio.strip() == (0.0, 2.0)

    for u in (0.5, 2.0):
        want = (1.0 + u) ** -2
        for backend in ("series", "quad", "contour"):
            r = mellin.density(ratio, u, backend)
            assert close(r["value"], want, 1e-9), (backend, r)
        r = mellin.density(ratio, u, "mc", seed=1)
        assert abs(r["value"] - want) < 4 * r["error"], r

    r = mellin.density(ratio, 1.0)
    assert r["backend"] == "quad" and r["fallback"], r

    uniform = mellin.PathwayModel.type1_beta(1.0, 1.0)
    prod = mellin.ConvolutionSpec.product(uniform, uniform)
    assert close(mellin.density(prod, math.exp(-1))["value"], 1.0, 1e-9)
    p23 = mellin.ConvolutionSpec.product(uniform, mellin.PathwayModel.type1_beta(1.5, 1.0))
    assert close(mellin.eval_case("P2_3", p23, 0.3)["value"], mellin.density(p23, 0.3, "quad")["value"], 1e-9)

    spec = mellin.ConvolutionSpec.from_json(prod.to_json())
    assert spec.case == "P2_3"
    try:
        mellin.density(spec, 1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("u outside the support was accepted")

    try:
        mellin.PathwayModel.gen_gamma(-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative alpha was accepted")

    report = json.loads(mellin.verify("P3_1"))
    assert report["passed"], report

    assert close(mellin.multivariate_gamma(2.0, 2), math.pi / 2, 1e-13)
    assert close(mellin.log_gamma(5.0), math.log(24.0), 1e-14)
    assert close(mellin.hyp_series([1.0, 1.0], [2.0], 0.5), 2 * math.log(2.0), 1e-12)
    assert len(mellin.CASES) == 14

    s = mellin.sample_convolution(prod, 1000, seed=3)
    assert s == mellin.sample_convolution(prod, 1000, seed=3)
    assert all(0.0 < x < 1.0 for x in s)

    print("smoke test passed")


if __name__ == "__main__":
    main()
