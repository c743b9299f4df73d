# coding: utf-8

# # Error versus sample size
#
# Repeat each estimator over independent trials and report bias and mean
# squared error against the known MI. Every trial's data comes from a child
# seed of one master seed, so all estimators see the same samples.

# In[1]:

import numpy as np

from mimix import get_estimator
from mimix.eval import mse_sweep
from mimix.synthgen import GeneratorSpec

SIZES = [500, 1000, 2000, 4000]
TRIALS = 20


def show(spec, estimators):
    print(f"\n{spec.name} {spec.params}")
    print(f"{'estimator':<22}" + "".join(f"{n:>10}" for n in SIZES))
    for label, est in estimators.items():
        res = mse_sweep(est, spec, SIZES, trials=TRIALS, master_seed=0)
        print(f"{label:<22}" + "".join(f"{v:>10.4f}" for v in res.mse_per_size)
              + f"   bias@{SIZES[-1]}={res.mean_bias_per_size[-1]:+.3f}")


ESTIMATORS = {
    "mixed": get_estimator("mixed"),
    "mixed (digamma)": get_estimator("mixed", marginal_term="digamma"),
    "ksg": get_estimator("ksg"),
    "noisy ksg s=0.1": get_estimator("noisy_ksg", sigma=0.1),
    "fixed partition": get_estimator("fixed_partition"),
}


# ## Discrete X, continuous Y

# In[2]:

show(GeneratorSpec("exp2", {"m": 5}), {**ESTIMATORS, "adaptive partition": get_estimator("adaptive_partition")})


# ## A mixture with atoms on both axes
#
# Half of the mass is a correlated Gaussian and half sits on the four corners
# (+-1, +-1). KSG treats the corners as continuous points at distance zero
# and goes badly wrong.

# In[3]:

show(GeneratorSpec("exp1"), ESTIMATORS)


# ## Zero inflation
#
# X ~ Exp(1), Y ~ Poisson(X), with Y forced to 0 in 15% of the samples.

# In[4]:

show(GeneratorSpec("exp4", {"p": 0.15}), ESTIMATORS)


# ## Two independent pairs stacked
#
# Only the k-NN estimators work directly in 2 dimensions per side. The
# partition estimator degrades with dimension.

# In[5]:

show(GeneratorSpec("exp3", {"m": 5, "dims": 2}),
     {k: v for k, v in ESTIMATORS.items() if k in ("mixed", "mixed (digamma)", "fixed partition")})
