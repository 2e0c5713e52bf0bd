// Overview: generated status report, status heatmap, failure listing.

import { clear, el, show, table } from "../dom.js";
import type { Envelope, OverviewData } from "../types.js";

const STATUS_CLASS: Record<string, string> = {
  success: "cell-success",
  crashed: "cell-crashed",
  timeout: "cell-timeout",
  memout: "cell-memout",
  running: "cell-running",
  not_evaluated: "cell-none",
};

export function renderOverview(container: HTMLElement, envelope: Envelope<OverviewData>): void {
  clear(container);
  const data = envelope.data;
  container.append(el("p", { class: "report", "data-role": "report" }, [data.report]));

  const countRows = Object.keys(data.counts)
    .filter((status) => data.counts[status] > 0)
    .map((status) => [status, show(data.counts[status])] as string[]);
  container.append(
    el("h3", {}, ["Trial statuses"]),
    table(["status", "trials"], countRows, "counts-table"),
  );

  const matrix = data.matrix;
  const heat = el("table", { class: "heatmap", "data-role": "status-matrix" });
  const head = el("tr", {}, [el("th", {}, ["config"])]);
  for (const budget of matrix.budgets) {
    head.append(el("th", {}, [show(budget)]));
  }
  heat.append(el("thead", {}, [head]));
  const body = el("tbody");
  matrix.config_ids.forEach((cid, row) => {
    const tr = el("tr", {}, [el("th", {}, [show(cid)])]);
    matrix.status[row].forEach((status) => {
      tr.append(el("td", { class: STATUS_CLASS[status] ?? "cell-none", title: status }));
    });
    body.append(tr);
  });
  heat.append(body);
  container.append(el("h3", {}, ["Status heatmap"]), heat);

  if (data.failures.length > 0) {
    const rows = data.failures.map((f) => {
      const trace: Node | string = f.traceback
        ? el("details", {}, [el("summary", {}, ["traceback"]), el("pre", {}, [f.traceback])])
        : "–";
      return [show(f.config_id), show(f.budget), f.status, trace];
    });
    container.append(
      el("h3", {}, ["Unsuccessful trials"]),
      table(["config", "budget", "status", "details"], rows, "failures-table"),
    );
  }
}
