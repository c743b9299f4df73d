# coding: utf-8

# # Ranking features by mutual information
#
# Twenty exponential features are observed through zero-inflated Poisson
# noise. The target is built from the first five. We score each feature by
# its MI with the 5-D target and see how well the scores separate relevant
# from irrelevant features.

# In[1]:

import numpy as np

from mimix import get_estimator
from mimix.eval import auroc, rank_features, roc_curve
from mimix.synthgen import gen_featsel

data = gen_featsel(3000, seed=4)
print(data.features.shape, data.target.shape, np.flatnonzero(data.relevant))


# In[2]:

for name in ("mixed", "fixed_partition"):
    ranking = rank_features(data.features, data.target, get_estimator(name))
    curve = roc_curve(ranking.scores, data.relevant)
    print(f"\n{name}: AUROC {auroc(curve):.3f}")
    for row in ranking.to_rows()[:7]:
        flag = "*" if data.relevant[row["feature"]] else " "
        print(f"  {row['rank']:>2} f{row['feature']:<3}{flag} {row['score']:.4f}")


# ## More dropout, less signal
#
# Zeroing more of the feature entries blurs the relevant features into the
# background.

# In[3]:

est = get_estimator("mixed")
for level in (0.0, 0.3, 0.6, 0.9):
    vals = []
    for seed in range(3):
        d = gen_featsel(2000, dropout=level, seed=seed)
        vals.append(auroc(roc_curve(rank_features(d.features, d.target, est).scores, d.relevant)))
    print(f"dropout {level:.1f}: mean AUROC {np.mean(vals):.3f}")
