# coding: utf-8

# # Mutual information on mixed data
#
# A short tour of `mimix`: build a dataset, estimate I(X;Y) with the
# k-nearest-neighbor estimator that handles point masses, and compare it
# against plain KSG and the binning estimators.

# In[1]:

import math

import numpy as np

import mimix
from mimix.synthgen import exp2_mi, gen_exp2


# ## Datasets
#
# `validate_dataset` takes two tables with the same number of rows. 1-D input
# becomes a single column. Anything non-finite is rejected with its row and
# column.

# In[2]:

ds = mimix.validate_dataset([0, 1, 2], [5, 6, 7])
print(ds)

try:
    mimix.validate_dataset([0.0, 1.0, np.nan], [1.0, 2.0, 3.0])
except mimix.DatasetError as exc:
    print("rejected:", exc)


# ## Atoms change the answer
#
# Three identical samples. Each one has radius 0, two coincident neighbors
# and two marginal neighbors. The mixed estimator puts psi(2) in the first
# term, KSG keeps psi(k) = psi(1).

# In[3]:

same = mimix.validate_dataset(np.ones(3), np.ones(3))
cfg = mimix.EstimatorConfig(k=1)
print("mixed:", mimix.estimate_mixed(same, cfg).value)
print("ksg:  ", mimix.estimate_ksg(same, cfg).value)
print("hand: ", (1 - np.euler_gamma) - math.log(3), -np.euler_gamma - math.log(3))


# ## A discrete X with a continuous Y
#
# X is uniform on {0..4} and Y is uniform on [X, X+2]. The true MI is
# log 5 - 0.8 log 2.

# In[4]:

data = gen_exp2(4000, m=5, seed=1)
truth = exp2_mi(5)
print(f"truth        {truth:.4f}")
for name in ("mixed", "ksg", "fixed_partition", "adaptive_partition"):
    est = mimix.get_estimator(name)
    print(f"{name:<18} {est(data).value:.4f}")
print(f"{'noisy_ksg s=0.1':<18} {mimix.get_estimator('noisy_ksg', sigma=0.1)(data, seed=3).value:.4f}")


# With the log(n + 1) marginal terms the estimator sits roughly 0.19 nats
# low at k = 5 on this distribution. The gap shrinks like 1/k, not with N.
# Replacing the marginal terms by psi(n) removes most of it.

# In[5]:

for k in (5, 20, 50):
    lit = mimix.estimate_mixed(data, mimix.EstimatorConfig(k=k)).value
    dig = mimix.estimate_mixed(data, mimix.EstimatorConfig(k=k, marginal_term="digamma")).value
    print(f"k={k:<3} log: {lit - truth:+.3f}   digamma: {dig - truth:+.3f}")


# ## Per-sample terms
#
# Every estimate carries its per-sample terms and the configuration used.

# In[6]:

res = mimix.estimate_mixed(data)
print(res.config_echo)
print(res.per_sample[:5], res.per_sample.mean())
