import json

import jsonschema
import numpy as np
import pytest

from lielinear.descriptor import load_schema
from lielinear.lie import GroupSpec
from lielinear.system import SystemSpec
from lielinear.verdict import (
    CERTIFICATE_NOT_FOUND,
    CONTROLLABLE,
    CRITERION_NOT_MET,
    INVALID_SYSTEM,
    analyze,
    canonical_json,
    report_json,
)


@pytest.fixture(scope="module")
def verdict_schema():
    return load_schema("verdict")


def _check_schema(v, schema):
    jsonschema.validate(json.loads(report_json(v)), schema)


class TestAnalyze:
    def test_example1(self, example1, verdict_schema):
        v = analyze(example1)
        assert v.status == CONTROLLABLE
        assert v.certificate.k == 3 and v.certificate.rank == 3
        assert v.unimodular_margin <= 1e-9
        assert any("controllable" in n for n in v.notes)
        _check_schema(v, verdict_schema)

    def test_example2_corrected(self, example2):
        assert analyze(example2).status == CONTROLLABLE

    def test_printed_example2_invalid(self, example2_printed, verdict_schema):
        v = analyze(example2_printed)
        assert v.status == INVALID_SYSTEM
        assert v.certificate is None and v.spectral is None and v.unimodular_margin is None
        assert any("b(0) != e" in n for n in v.notes)
        assert "b(0) != e" in report_json(v)
        _check_schema(v, verdict_schema)

    def test_hyperbolic(self, hyperbolic, verdict_schema):
        v = analyze(hyperbolic)
        assert v.status == CRITERION_NOT_MET
        assert sorted(z.real for z in v.spectral.offending()) == pytest.approx([0.25, 4.0], abs=1e-12)
        assert v.unimodular_margin == pytest.approx(3.0, abs=1e-12)
        assert v.certificate is not None
        assert any("reachable set" in n and "expanding" in n for n in v.notes)
        assert any("controllable set" in n and "contracting" in n for n in v.notes)
        doc = json.loads(report_json(v))
        assert {e["tag"] for e in doc["spectral"]["eigenvalues"]} == {"expanding", "unimodular", "contracting"}
        _check_schema(v, verdict_schema)

    def test_tolerance_forced(self, hyperbolic):
        v = analyze(hyperbolic, tol_unimodular=10)
        assert v.status == CONTROLLABLE
        assert any(n.startswith("tolerance-forced") for n in v.notes)

    def test_certificate_not_found(self, verdict_schema):
        sys = SystemSpec.from_strings(GroupSpec("SL", 2), [[1.0, 1.0], [0.0, 1.0]],
                                      [["1", "0*u1"], ["0", "1"]], [-0.5], [0.5])
        v = analyze(sys, k_max=4)
        assert v.status == CERTIFICATE_NOT_FOUND
        assert v.certificate is None
        assert any("inconclusive" in n for n in v.notes)
        _check_schema(v, verdict_schema)

    def test_never_controllable_without_premises(self, random_systems):
        for sys in random_systems[:15]:
            v = analyze(sys, k_max=4, samples=20)
            if v.status == CONTROLLABLE:
                assert v.certificate is not None and v.certificate.rank == sys.group.dim
                assert v.spectral.all_unimodular and v.unimodular_margin <= v.tol_unimodular
            if v.status == CRITERION_NOT_MET:
                assert v.unimodular_margin > v.tol_unimodular

    @pytest.mark.parametrize("c", [2.0, 0.25, 8.0])
    def test_scale_invariance_power_of_two(self, example1, hyperbolic, c):
        for sys in (example1, hyperbolic):
            a = report_json(analyze(sys))
            b = report_json(analyze(sys.with_conjugator(c * sys.h)))
            assert a == b

    @pytest.mark.parametrize("c", [3.0, 0.7, 1.9])
    def test_scale_invariance_general(self, example1, hyperbolic, c):
        for sys in (example1, hyperbolic):
            a = analyze(sys)
            b = analyze(sys.with_conjugator(c * sys.h))
            assert a.status == b.status
            assert abs(a.unimodular_margin - b.unimodular_margin) <= 1e-12
            assert np.allclose(a.spectral.dfo_matrix, b.spectral.dfo_matrix, atol=1e-12, rtol=0)

    def test_deterministic(self, example1):
        assert report_json(analyze(example1, seed=4)) == report_json(analyze(example1, seed=4))


class TestCanonicalJson:
    def test_sorted_keys(self):
        assert canonical_json({"b": 1, "a": [True, None]}) == '{"a":[true,null],"b":1}'

    def test_floats(self):
        assert canonical_json(1.0) == "1.0"
        assert canonical_json(0.1) == "0.10000000000000001"
        assert canonical_json(-0.0) == "0.0"
        assert canonical_json(1e300) == "1.0000000000000001e+300"
        assert canonical_json(float("inf")) == '"inf"'

    def test_numpy_scalars(self):
        assert canonical_json({"x": np.float64(2.5), "n": np.int64(3), "t": np.bool_(True)}) == '{"n":3,"t":true,"x":2.5}'

    def test_roundtrip_lossless(self, rng):
        values = rng.normal(size=200) * 10.0 ** rng.integers(-20, 20, size=200)
        assert json.loads(canonical_json(values.tolist())) == values.tolist()

    def test_verdict_roundtrip(self, hyperbolic):
        text = report_json(analyze(hyperbolic))
        assert canonical_json(json.loads(text)) == text

    def test_unsupported(self):
        with pytest.raises(TypeError):
            canonical_json(object())
