"""Scoring networks: set values, marginal gains, diminishing returns.

A scoring network is a bias-free feedforward net with non-negative weights
and a concave activation. On 0/1 indicator inputs it behaves as a monotone
submodular set function; on fractional inputs it is that function's
concave extension, so it can score real-valued heatmaps directly.
"""

import numpy as np

from seann import DsfArchitecture, DsfNetwork, empirical_lipschitz, lipschitz_bound

# f(x) = sqrt(x0 + x1 + x2): three interchangeable features
net = DsfNetwork(
    DsfArchitecture((3, 1, 1)),
    [np.array([[1.0, 1.0, 1.0]]), np.array([[1.0]])],
)

print("set values:")
for members in [set(), {0}, {0, 1}, {0, 1, 2}]:
    print(f"  f({members or '{}'}) = {net.evaluate_set(members):.6f}")

print("\ndiminishing returns: the same element is worth less in a bigger set")
for context in [set(), {0}, {0, 1}]:
    print(f"  gain(2 | {context or '{}'}) = {net.marginal_gain(2, context):.6f}")

print("\nthe concave extension scores fractional heatmaps:")
for x in [(1.0, 0.0, 0.0), (0.5, 0.5, 0.5), (1.0, 1.0, 1.0)]:
    print(f"  f_ext{x} = {net.evaluate(np.array(x)):.6f}")

# the reference four-layer architecture comes with a closed-form
# Lipschitz constant for its extension
ones = DsfNetwork.ones(DsfArchitecture((784, 512, 256, 32, 1)))
print(f"\nall-ones reference net: closed-form Lipschitz bound = {lipschitz_bound(ones):.2f}")

small = DsfNetwork.random(DsfArchitecture((16, 8, 4, 2, 1)), seed=0, low=0.2)
est = empirical_lipschitz(small, num_pairs=20000, seed=1)
print(f"random 16-input net: sampled estimate {est:.3f} <= bound {lipschitz_bound(small):.3f}")
