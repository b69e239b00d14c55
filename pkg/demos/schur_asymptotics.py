"""Relative error of scaled Schur quantities against their limits as eps shrinks."""
from prodmat.harness import SCHUR_FIXTURES, schur_limit_error

eps_list = (0.1, 0.05, 0.025, 0.0125, 0.00625)
print("fixture   " + "  ".join(f"eps={e:<7g}" for e in eps_list))
for kind, fixtures in SCHUR_FIXTURES.items():
    for k, fx in enumerate(fixtures):
        errs = [schur_limit_error(kind, fx, e) for e in eps_list]
        print(f"{kind}[{k}]    " + "  ".join(f"{v:<11.4g}" for v in errs))
