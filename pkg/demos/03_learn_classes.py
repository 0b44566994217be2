"""Learn the four correlation classes from two measured features.

This script generates the noisy training and test grids and fits the three
models: a small neural network, a kernel SVM and a depth-limited decision
tree. It prints accuracy and confusion for each, then repeats the fit with
noiseless training data to show the effect of a source mismatch.
"""

import numpy as np

from qcorr.experiments import RunConfig, generate_split, mismatch_study, train_and_evaluate

config = RunConfig()
train = generate_split(config, "train")
test = generate_split(config, "test")
print(f"{len(train)} training and {len(test)} test states at n0 = {config.n0}")

report, _ = train_and_evaluate(config, train, test)
for kind, entry in report["models"].items():
    four = entry["four_class"]
    binary = ", ".join(f"{q}? {b['accuracy']:.3f}" for q, b in entry["binary"].items())
    print(f"\n{kind}: four-class accuracy {four['accuracy']:.4f}; {binary}")
    print(np.array(four["confusion"]))

study = mismatch_study(config, datasets=(generate_split(config, "train", "none"), train, test))
print("\ntrained on noiseless data, tested on noisy data")
for kind, m in study["models"].items():
    print(f"{kind}: matched {m['matched_accuracy']:.4f}  mismatched {m['mismatched_accuracy']:.4f}")
