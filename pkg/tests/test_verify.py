"""Report blocks: verdict logic, recomputability, and the pinned fixtures."""

import hashlib
import json

import numpy as np
import pytest

from htwk import spec_to_model
from htwk.errors import PreconditionError
from htwk.verify import (
    CHECK_NAMES,
    FIXTURES,
    CheckBlock,
    VerificationReport,
    gplus_tail_report,
    ladder_identity_report,
    cycle_max_report,
    run_verification,
    class_reduction_report,
)

ANCHOR = "tail-class-reduction"


@pytest.fixture(scope="module")
def pinned_report(default_model):
    """Reduced-scale full verification on the heavy fixture."""
    return run_verification(
        default_model, seed=42, workers=1, checks=CHECK_NAMES,
        xs=(50.0, 100.0, 200.0, 500.0), cycles=500000, reps=20000,
        sup_reps=10000, renewal_xs=(1000.0, 10000.0),
        ladder_xs=(10.0, 50.0, 100.0))


def _blocks_by_name(report):
    return {b.name: b for blk in report.blocks for b in blk.walk()}


def test_pinned_run_is_green_everywhere(pinned_report):
    assert pinned_report.overall() is True
    blocks = _blocks_by_name(pinned_report)
    assert len(blocks) == 13
    assert all(b.verdict is True for b in blocks.values())
    assert set(blocks) == {
        "cycle-max-tail-asymptotic", "cycle-max-lower-bound",
        "max-law-tail-neutrality", "renewal-growth-band",
        "geometric-ladder-sum-identity", "ladder-sum-zero-atom",
        "ladder-height-tail-formula", "tail-class-reduction",
        "base-integral-criterion", "base-long-tail",
        "base-dominated-variation", "integrated-tail-convolution-neutrality",
        "integrated-tail-small-increments",
    }


def test_pinned_headline_numbers(pinned_report):
    main = pinned_report.blocks[0]
    # mean cycle length settles near 2.83 for this mixture
    assert 2.80 < main.scalars["tau_mean"] < 2.88
    ratio = np.asarray(main.columns["ratio"])
    # the finite-size excess shrinks along the probes and the farthest
    # one sits on the prediction
    assert np.all(np.diff(ratio) < 0.0)
    assert 0.9 < ratio[-1] < 1.1
    assert all(main.columns["conclusive"])


def test_verdicts_recompute_from_serialized_payload(pinned_report):
    payload = json.loads(json.dumps(pinned_report.to_dict()))
    main = payload["checks"][0]
    tol = main["tolerances"]["tol"]
    lo = np.asarray(main["columns"]["ratio_lo"])
    hi = np.asarray(main["columns"]["ratio_hi"])
    ok = (lo <= 1.0 + tol) & (hi >= 1.0 - tol)
    assert list(ok) == main["columns"]["pass"]
    concl = [i for i, c in enumerate(main["columns"]["conclusive"]) if c]
    assert main["verdict"] == all(ok[concl[-2:]])

    lower = main["subchecks"][0]
    floor = lower["tolerances"]["floor"]
    ok_l = np.asarray(lower["columns"]["ratio_hi"]) >= floor
    assert list(ok_l) == lower["columns"]["pass"]

    ladder = next(c for c in payload["checks"]
                  if c["check"] == "geometric-ladder-sum-identity")
    s = ladder["scalars"]
    assert ladder["verdict"] == (s["ks_distance"] < s["ks_threshold"])

    renewal = next(c for c in payload["checks"]
                   if c["check"] == "renewal-growth-band")
    cols, s = renewal["columns"], renewal["scalars"]
    ok_b = [(blo >= s["band_lo"]) and (bhi <= s["band_hi"])
            for blo, bhi in zip(cols["b_lo"], cols["b_hi"])]
    assert ok_b == cols["pass"]


def test_report_payload_is_json_clean(pinned_report):
    payload = pinned_report.to_dict()
    text = json.dumps(payload, sort_keys=True)
    assert json.loads(text) == payload
    assert "runtime" not in text
    assert payload["schema"] == "htwk-report/1"
    assert payload["overall"] is True
    times = pinned_report.runtimes()
    assert set(times) == {
        "cycle-max-tail-asymptotic", "renewal-growth-band",
        "geometric-ladder-sum-identity", "ladder-height-tail-formula",
        "tail-class-reduction"}
    assert all(t >= 0.0 for t in times.values())


def test_experiment_id_is_a_pure_function_of_the_setup(pinned_report):
    rep = pinned_report
    payload = json.dumps(
        {"schema": rep.schema, "model": rep.model_spec, "seed": rep.seed,
         "config": rep.config}, sort_keys=True)
    assert rep.experiment_id == hashlib.sha256(
        payload.encode()).hexdigest()[:12]
    other = VerificationReport(model_spec=rep.model_spec, seed=rep.seed + 1,
                               config=rep.config)
    assert other.experiment_id != rep.experiment_id


def test_light_control_rejects_the_heavy_prediction(light_model):
    report = run_verification(light_model, seed=43, checks=("main",),
                              xs=(2.0, 4.0, 6.0, 8.0), cycles=200000,
                              sup_reps=0)
    assert report.overall() is False
    main = report.blocks[0]
    assert main.verdict is False
    ratio = np.asarray(main.columns["ratio"])
    # exponential tails overshoot the product prediction geometrically
    assert np.all(np.diff(ratio) > 0.0)
    assert ratio[-1] > 10.0
    # the one-sided bound survives: the curve is never below the floor
    assert main.subchecks[0].name == "cycle-max-lower-bound"
    assert main.subchecks[0].verdict is True


def test_wrong_success_probability_is_detected(default_model):
    block = ladder_identity_report(default_model, reps=30000, seed=42,
                                   p_override=0.18)
    assert block.verdict is False
    assert block.scalars["p_used"] == 0.18
    assert block.scalars["ks_distance"] > 10 * block.scalars["ks_threshold"]
    # the zero atom of the geometric sum no longer matches the maximum
    atom = block.subchecks[0]
    assert atom.verdict is False
    assert abs(atom.scalars["atom_nu"] - 0.18) < 0.01
    assert atom.scalars["atom_m"] > 0.3
    with pytest.raises(PreconditionError, match="geometric"):
        ladder_identity_report(default_model, reps=100, seed=1,
                               p_override=1.5)


def test_sparse_hits_give_no_verdict(default_model):
    report = run_verification(default_model, seed=1, checks=("main",),
                              xs=(500.0, 1000.0), cycles=2000, sup_reps=0)
    assert report.blocks[0].verdict is None
    assert report.overall() is None


def test_divergent_criterion_reports_red_with_no_claims(k_divergent_model):
    block = class_reduction_report(k_divergent_model)
    assert block.verdict is False
    assert block.scalars["K_finite"] is False
    assert block.scalars["K_partial"] > 0.0
    assert block.notes
    assert block.subchecks == ()


def test_two_sided_route_without_the_integral_criterion(case_b_model):
    block = class_reduction_report(case_b_model)
    assert block.verdict is True
    assert block.scalars["case_a"] is False
    assert block.scalars["case_b"] is True
    subs = {s.name: s.verdict for s in block.subchecks}
    assert subs["base-integral-criterion"] is None
    assert subs["base-long-tail"] is True
    assert subs["base-dominated-variation"] is True
    assert subs["integrated-tail-convolution-neutrality"] is True
    assert subs["integrated-tail-small-increments"] is True
    assert any("mean diverges" in n for n in block.notes)


def test_overall_aggregation_logic():
    def rep(*verdicts):
        r = VerificationReport(model_spec="m", seed=1, config={})
        r.blocks = [CheckBlock(name=f"b{i}", anchor=ANCHOR, verdict=v)
                    for i, v in enumerate(verdicts)]
        return r

    assert rep(True, True).overall() is True
    assert rep(True, None).overall() is None
    assert rep(None, False).overall() is False
    assert rep().overall() is None
    nested = VerificationReport(model_spec="m", seed=1, config={})
    nested.blocks = [CheckBlock(
        name="top", anchor=ANCHOR, verdict=True,
        subchecks=(CheckBlock(name="sub", anchor=ANCHOR, verdict=False),))]
    assert nested.overall() is False


def test_probe_and_check_validation(default_model):
    with pytest.raises(PreconditionError, match="increasing"):
        cycle_max_report(default_model, (5.0, 4.0), cycles=10, seed=1)
    with pytest.raises(PreconditionError, match="increasing"):
        gplus_tail_report(default_model, (-1.0, 2.0), reps=10, seed=1)
    with pytest.raises(PreconditionError, match="unknown checks"):
        run_verification(default_model, seed=1, checks=("main", "bogus"))


def test_fixture_registry_is_wired():
    assert set(FIXTURES) == {"default", "light_control", "k_divergent",
                             "case_b"}
    seeds = [f.seed for f in FIXTURES.values()]
    assert len(set(seeds)) == len(seeds)
    for fx in FIXTURES.values():
        model = spec_to_model(fx.spec)
        assert model.spec_text
        assert set(fx.checks) <= set(CHECK_NAMES)
        assert all(isinstance(v, bool) for v in fx.expected.values())
    assert FIXTURES["default"].params["cycles"] == 10 ** 7
    assert FIXTURES["light_control"].expected[
        "cycle-max-tail-asymptotic"] is False
