"""
Confusion-matrix aggregation
============================

Collapse the bundled 9x9 perception-study matrix over (shape, vibration)
patterns into its shape and vibration marginals.
"""

import numpy as np

from hapticflight.evaluation import aggregate_confusion, reference_study_matrix

full = reference_study_matrix()
print(f"full matrix: {len(full.labels)} patterns, "
      f"diagonal mean {full.diagonal_mean:.4f}")

agg = aggregate_confusion(full)


def show(title, matrix):
    print(f"\n{title} (rows actual, cols predicted)")
    header = "         " + "  ".join(f"{str(l):>7s}" for l in matrix.labels)
    print(header)
    for label, row in zip(matrix.labels, np.asarray(matrix.values)):
        print(f"{str(label):>8s} " + "  ".join(f"{v:7.3f}" for v in row))


show("shape marginal", agg.shape_matrix)
show("vibration marginal", agg.vibration_matrix)

print(f"\ndiagonal means: full {agg.full_diagonal_mean:.3f}, "
      f"shape {agg.shape_diagonal_mean:.3f}, "
      f"vibration {agg.vibration_diagonal_mean:.3f}")
