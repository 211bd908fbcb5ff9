# SPDX-License-Identifier: MPL-2.0
# Copyright 2024, ASAM e.V.
# This Source Code Form is subject to the terms of the Mozilla
# Public License, v. 2.0. If a copy of the MPL was not distributed
# with this file, You can obtain one at https://mozilla.org/MPL/2.0/.

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

_COLORS = {"SGD": "tab:blue", "Adagrad": "tab:orange", "Adam": "tab:green"}


def plot_loss_curves(curves: pd.DataFrame, path: str, title: str) -> None:
    """Solid lines for the classic estimator, dashed for GCE, one color per optimizer."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for column in curves.columns:
        optimizer = column.split("&")[0]
        ax.plot(
            curves.index,
            curves[column],
            label=column,
            color=_COLORS.get(optimizer),
            linestyle="--" if column.endswith("&GCE") else "-",
        )
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
