# %% [markdown]
# Partition attacks against X * H(beta).
#
# An eavesdropper raises each encrypted flow to the q-th power.  The mask
# g^x disappears and only the residue class of H(beta) is left, worth
# log2(t) bits.  Repeating this needs fresh readings: either a new group per
# session or a fresh nonce r.  The same filter against X * iota(H(beta))
# learns nothing, since every ciphertext is already in the subgroup.

# %%
import numpy as np

from pakelab import ExperimentConfig, run_experiment

TRIALS, SESSIONS, DICT = 40, 10, 1024

configs = {
    "mulhash, rotating groups": dict(protocol="autha", instantiation="mulhash", rotate_params=True),
    "mulhash, one group": dict(protocol="autha", instantiation="mulhash", group="safe64"),
    "randmulhash, one group": dict(protocol="oeke", instantiation="randmulhash", group="safe64"),
    "muliota control": dict(protocol="autha", instantiation="muliota", rotate_params=True),
}

curves = {}
for label, kw in configs.items():
    res = run_experiment(ExperimentConfig(dict_size=DICT, sessions=SESSIONS, trials=TRIALS, seed=3, **kw))
    curves[label] = np.array(res.aggregate["median_survivors"])
    print(f"{label:<26} bits/session={res.aggregate['empirical_bits_per_session']}"
          f"  theory={res.aggregate['theoretical_bits_per_session']}  verdict={res.verdict}")

# %%
k = np.arange(SESSIONS + 1)
ideal = DICT / 2.0 ** k
print("\nsession  " + "  ".join(f"{c[:14]:>14}" for c in curves) + "      1024/2^k")
for i in k:
    print(f"{i:>7}  " + "  ".join(f"{curves[c][i]:>14.1f}" for c in curves) + f"  {ideal[i]:>12.1f}")

# %% [markdown]
# With one group, mulhash gives a single reading: the curve drops once and
# then stays flat.  Rotation and randomisation both follow 1024/2^k until
# only the true password is left.
