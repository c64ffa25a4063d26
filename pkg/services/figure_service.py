"""
Figure Service.

Static SVG rendering of conditional versus unconditional empirical
distributions. Rendering is deterministic: fixed hash salt, no date
metadata, Agg backend.
"""
from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from utils.logger import get_logger  # noqa: E402

logger = get_logger(__name__)


class FigurePanel:
    """One panel: conditional curve as points, unconditional curve as a line."""

    def __init__(self, title: str, y_grid: Sequence[float], psi_hat: Sequence[float],
                 cdf_hat: Sequence[float], sup_distance: float):
        self.title = title
        self.y_grid = np.asarray(y_grid, dtype=float)
        self.psi_hat = np.asarray(psi_hat, dtype=float)
        self.cdf_hat = np.asarray(cdf_hat, dtype=float)
        self.sup_distance = float(sup_distance)


class FigureService:
    """
    SVG output for the conditional-distribution comparison.
    """

    HASH_SALT = 'tailcond'
    FIGSIZE = (10, 4)

    @classmethod
    def render_comparison(cls, panels: Sequence[FigurePanel], path: Union[str, Path]) -> Path:
        """
        Draw the panels side by side and save an SVG.

        Args:
            panels: Panels in display order
            path: Output file (suffix forced to .svg)

        Returns:
            Path written
        """
        path = Path(path).with_suffix('.svg')
        path.parent.mkdir(parents=True, exist_ok=True)
        with plt.rc_context({'svg.hashsalt': cls.HASH_SALT, 'svg.fonttype': 'none'}):
            fig, axes = plt.subplots(1, len(panels), figsize=cls.FIGSIZE, squeeze=False)
            for ax, panel in zip(axes[0], panels):
                ax.plot(panel.y_grid, panel.cdf_hat, color='black', linewidth=1.2, label='Empirical distribution')
                ax.plot(panel.y_grid, panel.psi_hat, linestyle='none', marker='o', markersize=3,
                        color='tab:blue', label='Empirical conditional distribution')
                ax.set_title(f"{panel.title} (sup distance {panel.sup_distance:.3f})")
                ax.set_xlabel('y')
                ax.set_ylim(-0.02, 1.02)
                ax.legend(loc='lower right', fontsize='small')
            fig.tight_layout()
            fig.savefig(path, format='svg', metadata={'Date': None})
            plt.close(fig)
        logger.info(f"Figure written to {path}")
        return path
