"""Regenerate the CSV tables behind the strategy-ratio figures.

Produces six files in the output directory:

  game1_bull.csv, game1_bear.csv, game2_bull.csv, game2_bear.csv
      benefit and investment ratios on the default (gamma=delta) x
      (lambda=mu) grid, one sheet per game/market pair.
  aux_lambda_game1.csv
      game 1, lambda varied alone (gamma=delta=2, mu=1 fixed), both
      markets. Isolates pure ambiguity-aversion effects: the investment
      column is constant along lambda, the benefit column decreases.
  aux_mu_game2.csv
      game 2, bear market, mu varied alone (gamma=2, lambda=1 fixed).
      The solved ratios do not depend on mu at all.

Usage: python3 scripts/make_figure_tables.py [--out DIR]
"""

import argparse
import pathlib

import numpy as np

from pensiongame import Barriers, Preferences, market_from_scalars
from pensiongame.sensitivity import (
    GAMMA_DELTA_GRID,
    LAMBDA_MU_GRID,
    AxisSpec,
    sweep,
    sweep_table_csv,
)

BULL = market_from_scalars(r=0.01, b=0.144604, sigma=0.10748)
BEAR = market_from_scalars(r=0.01, b=0.014, sigma=0.2678)
BARRIERS = Barriers(l=1.0, v=2.0, x0=1.5)
P_BASE = Preferences(alpha=0.02, beta=0.02, gamma=2.0, delta=2.0, lam=1.0, mu=1.0)


def default_tables():
    axes = (
        AxisSpec("game", (1, 2)),
        AxisSpec("market", ("bull", "bear")),
        AxisSpec("gamma_delta", GAMMA_DELTA_GRID),
        AxisSpec("lambda_mu", LAMBDA_MU_GRID),
    )
    table = sweep(BULL, BEAR, P_BASE, axes, barriers=BARRIERS)
    out = {}
    for game in (1, 2):
        for market in ("bull", "bear"):
            name = f"game{game}_{market}.csv"
            out[name] = sweep_table_csv(table, select={"game": game, "market": market})
    return out


def aux_tables():
    lam_axis = (
        AxisSpec("market", ("bull", "bear")),
        AxisSpec("lambda", tuple(np.linspace(0.0, 4.0, 41))),
    )
    lam_table = sweep(BULL, BEAR, P_BASE, lam_axis)
    mu_axis = (
        AxisSpec("game", (2,)),
        AxisSpec("market", ("bear",)),
        AxisSpec("mu", tuple(np.linspace(0.0, 0.15, 31))),
    )
    mu_table = sweep(BULL, BEAR, P_BASE, mu_axis, barriers=BARRIERS)
    return {
        "aux_lambda_game1.csv": sweep_table_csv(lam_table),
        "aux_mu_game2.csv": sweep_table_csv(mu_table, select={"game": 2, "market": "bear"}),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/figures", help="output directory")
    args = ap.parse_args()
    out_dir = pathlib.Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    tables = default_tables()
    tables.update(aux_tables())
    for name, text in tables.items():
        path = out_dir / name
        path.write_text(text)
        n_rows = text.count("\n") - 1
        print(f"wrote {path} ({n_rows} rows)")


if __name__ == "__main__":
    main()
