// Pareto front: per-source scatter with front lines; points click through to
// the configuration detail page.

import { clear, el, show } from "../dom.js";
import { legend, scatter, type ScatterPoint } from "../svg.js";
import type { Envelope, ParetoData, ParetoPoint } from "../types.js";

const SOURCE_COLORS = ["#0077bb", "#ee7733", "#009988", "#cc3311", "#33bbee", "#ee3377"];

export interface ParetoHandlers {
  onPointClick: (point: ParetoPoint) => void;
}

export function renderPareto(
  container: HTMLElement,
  envelope: Envelope<ParetoData>,
  handlers: ParetoHandlers,
): void {
  clear(container);
  const data = envelope.data;
  let showDominated = true;

  const controls = el("label", { class: "filter" });
  const checkbox = el("input", {
    type: "checkbox",
    checked: "checked",
    change: () => {
      showDominated = checkbox.checked;
      draw();
    },
  }) as HTMLInputElement;
  controls.append(checkbox, " show dominated points");

  const plotHost = el("div", { "data-role": "pareto-plot" });
  container.append(
    el("p", {}, [
      `Pareto front of ${data.objective_x} vs ${data.objective_y} at budget ${show(data.budget)}`,
    ]),
    controls,
    plotHost,
    legend(
      data.sources.map((source, i) => ({
        color: SOURCE_COLORS[i % SOURCE_COLORS.length],
        label: source.id,
      })),
    ),
  );

  function draw(): void {
    clear(plotHost);
    const points: ScatterPoint[] = [];
    const lines = [];
    for (const [i, source] of data.sources.entries()) {
      const color = SOURCE_COLORS[i % SOURCE_COLORS.length];
      const front = source.points
        .filter((p) => !p.dominated)
        .sort((a, b) => a.x - b.x || a.y - b.y);
      lines.push({ color, points: front.map((p) => ({ x: p.x, y: p.y })) });
      for (const point of source.points) {
        if (point.dominated && !showDominated) continue;
        points.push({
          x: point.x,
          y: point.y,
          color,
          faded: point.dominated,
          cssClass: point.dominated ? "pareto-dominated" : "pareto-front",
          hoverLines: [
            `source: ${source.id}`,
            `config: ${show(point.origin_config_id)} (${point.origin_run_id})`,
            `${data.objective_x}: ${show(point.x)}`,
            `${data.objective_y}: ${show(point.y)}`,
            point.dominated ? "dominated" : "on the Pareto front",
            "click for configuration details",
          ],
          onClick: () => handlers.onPointClick(point),
        });
      }
    }
    plotHost.append(
      scatter(points, { xLabel: data.objective_x, yLabel: data.objective_y, lines }),
    );
  }

  draw();
}
