# %% [markdown]
# Honest runs of every protocol on the toy group Z_23^* (q = 11, t = 2)
# and on the 16-bit prime-order curve.  Each transcript line is
# ``index sender tag payload-hex``.

# %%
import random

from pakelab import EC65519, MODP23, InstantiationSpec, OracleSuite, run_protocol

suite = OracleSuite(2024)
rng = random.Random(2024)

# %%
for params in (MODP23, EC65519):
    print(f"== {params.name}: p={params.p} q={params.q} t={params.t}")
    for protocol, inst in [("autha", "muliota"), ("oeke", "blockcipher"), ("srp5", None),
                           ("ecsrp1", None), ("srp6", None), ("dh", None)]:
        if protocol == "srp6" and params.kind.value == "ec":
            continue  # 3*beta + g^y is field addition, undefined on points
        if protocol == "dh" and params.t == 1:
            continue
        spec = InstantiationSpec.parse(inst) if inst else None
        tr = run_protocol(protocol, params, suite, b"hunter2", rng, spec)
        print(f"-- {protocol} {inst or ''}  agreed={tr.agreed}")
        print(tr.to_text(), end="")

# %% [markdown]
# The plain Diffie-Hellman transcript above runs in the whole ambient group of
# order 22, which is what the small-subgroup demo exploits.
