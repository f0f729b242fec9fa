"""
SVG-картинка бифуркационной диаграммы.

Без библиотек построения графиков: две ломаные (нижняя и верхняя ветви),
точки, вертикаль в точке поворота и вертикаль-барьер Λ̄.
"""

from pathlib import Path
from xml.sax.saxutils import escape

from app.branch import BifurcationDiagram, DiagramPoint
from app.exceptions import EmptyDiagram
from app.log import get_logger

log = get_logger(__name__)

WIDTH = 640
HEIGHT = 480
MARGIN = 56

BRANCH_COLORS = {"lower": "#1f77b4", "upper": "#d62728"}


class _Frame:
    """Линейное отображение (λ, ‖u‖) в пиксели."""

    def __init__(self, x_max: float, y_max: float) -> None:
        self.x_max = x_max if x_max > 0 else 1.0
        self.y_max = y_max if y_max > 0 else 1.0

    def x(self, lam: float) -> float:
        return MARGIN + (WIDTH - 2 * MARGIN) * lam / self.x_max

    def y(self, value: float) -> float:
        return HEIGHT - MARGIN - (HEIGHT - 2 * MARGIN) * value / self.y_max


def _polyline(points: list[DiagramPoint], tag: str, frame: _Frame) -> str:
    coords = " ".join(f"{frame.x(pt.lambda_):.2f},{frame.y(pt.sup_norm):.2f}" for pt in points)
    return (
        f'<polyline class="branch-{tag}" points="{coords}" fill="none" '
        f'stroke="{BRANCH_COLORS[tag]}" stroke-width="1.5"/>'
    )


def _vline(element_id: str, lam: float, frame: _Frame, color: str, label: str) -> list[str]:
    x = frame.x(lam)
    return [
        f'<line id="{element_id}" x1="{x:.2f}" y1="{MARGIN}" x2="{x:.2f}" '
        f'y2="{HEIGHT - MARGIN}" stroke="{color}" stroke-dasharray="6,4"/>',
        f'<text x="{x + 4:.2f}" y="{MARGIN + 12}" font-size="11" fill="{color}">{escape(label)}</text>',
    ]


def emit_plot(diagram: BifurcationDiagram, path: Path) -> Path:
    """
    Записать диаграмму (λ, ‖u‖∞) в SVG.

    Ломаных всегда ровно две; у пустой ветви список точек пуст.
    Маркер точки поворота опускается, если она не найдена.

    Raises:
        EmptyDiagram: В диаграмме нет ни одной точки.
    """
    if not diagram.points:
        raise EmptyDiagram("нечего рисовать: диаграмма пуста", picone_bound=diagram.picone_bound)

    lam_max = max(pt.lambda_ for pt in diagram.points)
    frame = _Frame(1.05 * max(lam_max, diagram.picone_bound), 1.1 * diagram.max_sup_norm)

    body: list[str] = [
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line class="axis" x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line class="axis" x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2:.0f}" y="{HEIGHT - 16}" font-size="12">λ</text>',
        f'<text x="12" y="{HEIGHT / 2:.0f}" font-size="12">sup u</text>',
    ]
    for tag in ("lower", "upper"):
        points = sorted(diagram.branch(tag), key=lambda pt: pt.lambda_)
        body.append(_polyline(points, tag, frame))
        body.extend(
            f'<circle cx="{frame.x(pt.lambda_):.2f}" cy="{frame.y(pt.sup_norm):.2f}" r="2" '
            f'fill="{BRANCH_COLORS[tag]}"/>'
            for pt in points
        )

    if diagram.fold_lambda is not None:
        body.extend(_vline("fold", diagram.fold_lambda, frame, "#2ca02c", f"Λ ≈ {diagram.fold_lambda:.4g}"))
    body.extend(_vline("picone-bound", diagram.picone_bound, frame, "#7f7f7f", f"Λ̄ = {diagram.picone_bound:.4g}"))

    svg = "\n".join(
        [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            *("  " + line for line in body),
            "</svg>",
            "",
        ]
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg, encoding="utf-8")
    log.info("artifact.written", path=str(path), kind="svg")
    return path
