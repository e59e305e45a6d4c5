"""A null experiment: no correlated errors, so nothing should be flagged.

Ten sequential measurements of the expectation matrix give element-wise
mean, standard deviation and significance of the partial-determinant
deviation.  With independent preparation and measurement stages every
significance entry stays well below the 3-sigma detection threshold.
"""

import numpy as np

from spamtomo import ExperimentPlan, NoiseModel, delta_statistics, detect, run_experiment

np.set_printoptions(precision=4, suppress=True)

plan = ExperimentPlan(noise=NoiseModel(seed=2026), repetitions=10)
stats = delta_statistics(run_experiment(plan))

print("mean of Delta - 1:\n", stats.mean)
print("\nstd of Delta - 1:\n", stats.std)
print("\n|mean| / std:\n", stats.significance)

outcome = detect(stats, threshold=3.0)
print("\ndetected:", outcome.detected)
print("largest significance:", stats.significance.max())
