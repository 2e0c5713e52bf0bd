// Configuration footprint: 2-D projection with evaluated / incumbent /
// border / random points and hover tooltips listing hyperparameter values.

import { clear, el, show } from "../dom.js";
import { legend, scatter, valueLines, type ScatterPoint } from "../svg.js";
import type { Envelope, FootprintData, FootprintPoint } from "../types.js";

export const KIND_COLORS: Record<FootprintPoint["kind"], string> = {
  evaluated: "#ee7733", // orange
  incumbent: "#cc3311", // red diamond
  border: "#009988", // green
  random: "#9467bd", // purple
};

export interface FootprintHandlers {
  onPointClick?: (point: FootprintPoint) => void;
}

export function renderFootprint(
  container: HTMLElement,
  envelope: Envelope<FootprintData>,
  handlers: FootprintHandlers = {},
): void {
  clear(container);
  const data = envelope.data;
  const visible: Record<string, boolean> = {
    evaluated: true,
    incumbent: true,
    border: true,
    random: true,
  };

  const filters = el("div", { class: "filter" });
  for (const kind of Object.keys(visible)) {
    const label = el("label", {});
    const box = el("input", {
      type: "checkbox",
      checked: "checked",
      "data-kind": kind,
      change: () => {
        visible[kind] = box.checked;
        draw();
      },
    }) as HTMLInputElement;
    label.append(box, ` ${kind}`);
    filters.append(label);
  }

  const plotHost = el("div", { "data-role": "footprint-plot" });
  container.append(
    el("p", {}, [
      `Projection of the configuration space (${data.objective}, budget ${show(data.budget)}, seed ${show(data.seed)})`,
    ]),
    filters,
    plotHost,
    legend(
      Object.entries(KIND_COLORS).map(([kind, color]) => ({ color, label: kind })),
    ),
  );

  function hoverFor(point: FootprintPoint): string[] {
    const lines = [`kind: ${point.kind}`];
    if (point.config_id !== null) lines.push(`config: ${show(point.config_id)}`);
    if (point.cost !== null) lines.push(`cost: ${show(point.cost)}`);
    lines.push(...valueLines(point.values));
    return lines;
  }

  function draw(): void {
    clear(plotHost);
    const points: ScatterPoint[] = [];
    for (const point of data.points) {
      if (!visible[point.kind]) continue;
      const clickable =
        point.origin_run_id !== null && point.origin_config_id !== null && handlers.onPointClick;
      points.push({
        x: point.x,
        y: point.y,
        color: KIND_COLORS[point.kind],
        shape: point.kind === "incumbent" ? "diamond" : "circle",
        cssClass: `footprint-${point.kind}`,
        hoverLines: hoverFor(point),
        onClick: clickable ? () => handlers.onPointClick?.(point) : undefined,
      });
    }
    plotHost.append(scatter(points, { xLabel: "mds-1", yLabel: "mds-2" }));
  }

  draw();
}
