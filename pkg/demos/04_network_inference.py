# coding: utf-8

# # Recovering a gene network under dropout
#
# A random linear structural equation model over 20 genes stands in for an
# expression dataset. Every gene pair is scored by estimated MI and the
# scores are compared with the true edge list. Dropout zeroes entries at
# random, as single-cell sequencing does.

# In[1]:

import math

import numpy as np

from mimix import get_estimator
from mimix.eval import auroc, auroc_null_sd, edge_labels, roc_curve, score_gene_pairs
from mimix.synthgen import apply_dropout, gen_sem_network

expr, edges = gen_sem_network(660, n_genes=20, seed=0)
print(expr.shape, "edges:", len(edges))


# In[2]:

est = get_estimator("mixed")
for level in (0.0, 0.3, 0.6, 0.9):
    observed = apply_dropout(expr, level, seed=1)
    scores = score_gene_pairs(observed, est)
    labels = edge_labels(scores.pairs, edges, expr.shape[1])
    print(f"dropout {level:.1f}: AUROC {auroc(roc_curve(scores.scores, labels)):.3f}")

n_pos = len(edges)
n_neg = math.comb(20, 2) - n_pos
print(f"random ranking: 0.5 +- {auroc_null_sd(n_pos, n_neg):.3f}")


# ## Which pairs rank highest?

# In[3]:

scores = score_gene_pairs(expr, est)
labels = edge_labels(scores.pairs, edges, 20)
top = np.argsort(-scores.scores)[:10]
for i in top:
    a, b = scores.pairs[i]
    print(f"g{a:<2} g{b:<2} {scores.scores[i]:.3f} {'edge' if labels[i] else ''}")
