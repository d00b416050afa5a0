# %% [markdown]
# Attacks that need one interaction.
#
# * X * g^H(beta): impersonate the client once, then test every guess
#   against whatever the server sends under the session key.
# * Plain Diffie-Hellman with t > 1: push both flows into the order-t subgroup.
# * SRP6 with a fixed u: a stolen verifier is enough to log in.
# * EC-SRP1: act as the server for one login and test guesses against M.
#   SRP5, which masks g^y with iota(H(beta)), resists the same strategy.

# %%
from pakelab import ExperimentConfig, run_experiment

runs = [
    ("impersonate, auth hash", dict(protocol="autha", instantiation="mulexphash", group="safe64",
                                    attack="impersonate", oracle="authhash")),
    ("impersonate, app record", dict(protocol="autha", instantiation="mulexphash", group="ec65519",
                                     attack="impersonate", oracle="redundant")),
    ("impersonate, credential", dict(protocol="autha", instantiation="mulexphash", group="safe64",
                                     attack="impersonate", oracle="credential")),
    ("small subgroup, p=23", dict(protocol="dh", group="modp23", attack="small-subgroup")),
    ("small subgroup, curve t=4", dict(protocol="dh", group="ec23", attack="small-subgroup")),
    ("srp6 fixed u", dict(protocol="srp6", group="safe64", attack="srp6-fixed-u")),
    ("ec-srp1 dictionary", dict(protocol="ecsrp1", group="ec65519", attack="ecsrp1-dictionary")),
    ("srp5 control", dict(protocol="srp5", group="ec65519", attack="ecsrp1-dictionary")),
]

for label, kw in runs:
    res = run_experiment(ExperimentConfig(dict_size=1024, sessions=1, trials=10, seed=11, **kw))
    a = res.aggregate
    extra = f"survivors {a['median_survivors'][-1]:.0f}" if "median_survivors" in a else ""
    print(f"{label:<28} success={a['success_rate']:.2f} verdict={a['verdict']:<8} {extra}")
