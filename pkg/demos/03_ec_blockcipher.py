# %% [markdown]
# An ideal block cipher over the encoded group is not enough.  Decrypting an
# observed flow under a wrong password gives a uniform string, and only some
# strings name group elements.  For the 16-bit curve, with points compressed
# to 2x + (y mod 2), about half of all 17-bit strings are valid points.

# %%
import random

import numpy as np
from scipy.stats import binomtest

from pakelab import EC65519, ExperimentConfig, Instantiation, InstantiationSpec, OracleSuite, run_experiment
from pakelab.ciphers import NOT_AN_ELEMENT, block_width, decrypt, encrypt

P = EC65519
spec = InstantiationSpec(Instantiation.BLOCK_CIPHER)
suite, rng = OracleSuite(5), random.Random(5)

c = encrypt(spec, P, suite, P.gexp(17), P.gexp(rng.randrange(1, P.q)), rng)
valid = np.array([decrypt(spec, P, suite, P.gexp(1000 + i), c) is not NOT_AN_ELEMENT for i in range(3000)])
density = (P.q - 1) / 2 ** block_width(P)
print(f"valid under wrong keys: {valid.mean():.4f} (density {density:.4f})")
print("binomial test p-value:", round(binomtest(int(valid.sum()), valid.size, density).pvalue, 3))

# %%
for protocol in ("oeke", "autha"):
    res = run_experiment(ExperimentConfig(protocol=protocol, instantiation="blockcipher", group="ec65519",
                                          dict_size=1024, sessions=12, trials=30, seed=1))
    a = res.aggregate
    print(f"{protocol}: {a['empirical_bits_per_session']} bits/session, theory {a['theoretical_bits_per_session']}, "
          f"median survivors {a['median_survivors'][:6]}")
