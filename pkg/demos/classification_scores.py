"""
Label sets under three classification scores
=============================================

Fit multinomial logistic regression on the ten-class synthetic model and
build 90% label sets with the LAC, APS and RAPS scores, first with plain
split conformal calibration and then with each aggregator of the
symmetrized score. The disparity column is the mean Jaccard distance
between a row's set and the set it would get if its attribute were
flipped.
"""

from cfcp import (
    AGGREGATORS,
    FeatureMap,
    Predictor,
    ScoreKind,
    SynthClassification,
    attach_counterfactuals,
    cf_cp,
    make_rng,
    split,
    split_cp,
)
from cfcp.metrics import accuracy, avg_size, coverage, csd

rng = make_rng(3, "demo/clf")
scm = SynthClassification.sample(rng.child("scm"))
ds = attach_counterfactuals(scm.generate(6000, rng), scm)
train, cal, test = split(ds, 2500, 1000, 2500, make_rng(3, "demo/split"))

model = Predictor.fit(train.X, train.A, train.Y, "classification",
                      FeatureMap(True, ds.domain), K=ds.K)
print(f"test accuracy {accuracy(model.predict(test.X, test.A), test.Y):.3f}\n")


def summarize(label, build):
    sets = {v: build(v) for v in (None, *ds.domain)}
    flips = {v: sets[v] for v in ds.domain}
    print(f"  {label:16s} coverage {coverage(sets[None], test.Y):.3f}"
          f"  size {avg_size(sets[None]):5.2f}"
          f"  disparity {csd(sets[None], flips, test.A):.3f}")


for name in ("lac", "aps", "raps"):
    kind = ScoreKind(name)
    print(name.upper())
    summarize("split CP", lambda v: split_cp(cal, test, model, kind, 0.1, view=v)[0])
    for agg in AGGREGATORS:
        summarize(f"symmetrized {agg}",
                  lambda v, agg=agg: cf_cp(cal, test, model, kind, agg, 0.1, view=v)[0])
    print()
