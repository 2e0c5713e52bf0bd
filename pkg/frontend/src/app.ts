// App shell: target selection, plugin tabs, input blocks, submit/poll
// lifecycle, hash routing, and auto-refresh when a watched run changes.

import { ApiClient } from "./api.js";
import { clear, el, errorCard, show } from "./dom.js";
import {
  DEFAULT_ROUTE,
  PLUGIN_ORDER,
  decodeHash,
  encodeDetailHash,
  encodeViewHash,
  type Route,
  type ViewRoute,
} from "./state.js";
import type { Envelope, FootprintPoint, ParetoPoint, RunInfo } from "./types.js";
import { renderCorrelation } from "./views/correlation.js";
import { renderDetail } from "./views/detail.js";
import { renderFootprint } from "./views/footprint.js";
import { renderImportance } from "./views/importance.js";
import { renderOverview } from "./views/overview.js";
import { renderPareto } from "./views/pareto.js";

const RUN_POLL_MS = 5000;
const JOB_POLL_MS = 1000;

const PLUGIN_TITLES: Record<string, string> = {
  overview: "Overview",
  footprint: "Configuration Footprint",
  budget_correlation: "Budget Correlation",
  pareto: "Pareto Front",
  importance: "Importances",
};

export class App {
  private route: Route = { ...DEFAULT_ROUTE };
  private runs: RunInfo[] = [];
  private groups: { name: string; run_ids: string[] }[] = [];
  private lastSeenHash: string | null = null;
  private runPollTimer: number | null = null;
  private submitSeq = 0;

  private readonly targetSelect: HTMLSelectElement;
  private readonly tabBar: HTMLElement;
  private readonly inputsHost: HTMLElement;
  private readonly viewHost: HTMLElement;
  private readonly statusLine: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
  ) {
    this.targetSelect = el("select", {
      id: "target-select",
      change: () => {
        const target = this.targetSelect.value || null;
        this.navigateView({ ...this.viewRoute(), target, inputs: {} });
      },
    }) as HTMLSelectElement;
    this.tabBar = el("nav", { class: "tabs" });
    this.inputsHost = el("section", { class: "inputs" });
    this.viewHost = el("main", { class: "view" });
    this.statusLine = el("span", { class: "status-line" });

    const header = el("header", {}, [
      el("h1", {}, ["optboard"]),
      el("label", {}, ["target: ", this.targetSelect]),
      this.statusLine,
    ]);
    root.append(header, this.tabBar, this.inputsHost, this.viewHost);

    window.addEventListener("hashchange", () => {
      this.route = decodeHash(window.location.hash);
      void this.renderRoute();
    });
  }

  private viewRoute(): ViewRoute {
    return this.route.kind === "view" ? this.route : { ...DEFAULT_ROUTE };
  }

  async start(): Promise<void> {
    await this.refreshTargets();
    this.route = decodeHash(window.location.hash);
    await this.renderRoute();
    this.runPollTimer = window.setInterval(() => {
      void this.pollRuns();
    }, RUN_POLL_MS);
  }

  stop(): void {
    if (this.runPollTimer !== null) window.clearInterval(this.runPollTimer);
  }

  navigateView(route: ViewRoute): void {
    window.location.hash = encodeViewHash(route.target, route.plugin, route.inputs);
  }

  navigateToDetail(runId: string, configId: number): void {
    window.location.hash = encodeDetailHash(runId, configId);
  }

  private async refreshTargets(): Promise<void> {
    try {
      [this.runs, this.groups] = await Promise.all([
        this.api.listRuns(),
        this.api.listGroups(),
      ]);
    } catch (err) {
      this.statusLine.textContent = `API unreachable: ${err}`;
      return;
    }
    const current = this.targetSelect.value;
    clear(this.targetSelect as unknown as HTMLElement);
    for (const run of this.runs) {
      this.targetSelect.append(el("option", { value: run.id }, [`run: ${run.id}`]));
    }
    for (const group of this.groups) {
      this.targetSelect.append(
        el("option", { value: group.name }, [`group: ${group.name}`]),
      );
    }
    if (current) this.targetSelect.value = current;
  }

  private async pollRuns(): Promise<void> {
    await this.refreshTargets();
    const route = this.route;
    if (route.kind !== "view" || route.target === null) return;
    const run = this.runs.find((r) => r.id === route.target);
    if (run === undefined) return;
    this.statusLine.textContent = `hash ${run.hash.slice(0, 8)} · refreshed ${run.last_refresh ?? "never"}`;
    if (this.lastSeenHash !== null && run.hash !== this.lastSeenHash) {
      this.lastSeenHash = run.hash;
      await this.renderRoute(); // run changed on disk: re-submit the visible view
    } else {
      this.lastSeenHash = run.hash;
    }
  }

  private renderTabs(active: string): void {
    clear(this.tabBar);
    for (const plugin of PLUGIN_ORDER) {
      const button = el(
        "button",
        {
          class: plugin === active ? "tab active" : "tab",
          click: () => this.navigateView({ ...this.viewRoute(), plugin, inputs: {} }),
        },
        [PLUGIN_TITLES[plugin]],
      );
      this.tabBar.append(button);
    }
  }

  private renderInputs(route: ViewRoute): void {
    clear(this.inputsHost);
    const run = this.runs.find((r) => r.id === route.target);
    const source = run ?? this.runsForGroup(route.target);
    if (!source) return;
    const objectives = source.objectives.map((o) => o.name);
    const budgets = source.budgets;

    const resubmit = (patch: Record<string, unknown>) => {
      this.navigateView({ ...route, inputs: { ...route.inputs, ...patch } });
    };

    const addSelect = (label: string, key: string, options: string[], current: string) => {
      const select = el("select", {
        change: () => resubmit({ [key]: select.value }),
      }) as HTMLSelectElement;
      for (const value of options) {
        const option = el("option", { value }, [value]) as HTMLOptionElement;
        option.selected = value === current;
        select.append(option);
      }
      this.inputsHost.append(el("label", {}, [`${label}: `, select]));
      return select;
    };
    const addBudget = (key = "budget") => {
      const current = show(route.inputs[key] ?? budgets[budgets.length - 1]);
      const select = el("select", {
        change: () => resubmit({ [key]: Number(select.value) }),
      }) as HTMLSelectElement;
      for (const budget of budgets) {
        const option = el("option", { value: String(budget) }, [show(budget)]) as HTMLOptionElement;
        option.selected = String(budget) === current;
        select.append(option);
      }
      this.inputsHost.append(el("label", {}, ["budget: ", select]));
    };
    const addSeed = () => {
      const input = el("input", {
        type: "number",
        value: show(route.inputs.seed ?? 0),
        change: () => resubmit({ seed: Number(input.value) }),
      }) as HTMLInputElement;
      this.inputsHost.append(el("label", {}, ["seed: ", input]));
    };

    switch (route.plugin) {
      case "overview":
        break;
      case "budget_correlation":
        addSelect("objective", "objective", objectives, String(route.inputs.objective ?? objectives[0]));
        break;
      case "pareto":
        if (objectives.length >= 2) {
          addSelect("x", "objective_x", objectives, String(route.inputs.objective_x ?? objectives[0]));
          addSelect("y", "objective_y", objectives, String(route.inputs.objective_y ?? objectives[1]));
        }
        addBudget();
        break;
      case "footprint":
        addSelect("objective", "objective", objectives, String(route.inputs.objective ?? objectives[0]));
        addBudget();
        addSeed();
        break;
      case "importance":
        addSelect("objective", "objective", objectives, String(route.inputs.objective ?? objectives[0]));
        addBudget();
        addSeed();
        break;
    }
  }

  private runsForGroup(target: string | null): RunInfo | undefined {
    const group = this.groups.find((g) => g.name === target);
    if (!group) return undefined;
    return this.runs.find((r) => r.id === group.run_ids[0]);
  }

  private async renderRoute(): Promise<void> {
    const route = this.route;
    if (route.kind === "detail") {
      clear(this.tabBar);
      clear(this.inputsHost);
      try {
        const detail = await this.api.configDetail(route.runId, route.configId);
        renderDetail(this.viewHost, detail, () => window.history.back());
      } catch (err) {
        clear(this.viewHost);
        this.viewHost.append(errorCard(String(err)));
      }
      return;
    }
    if (route.target === null && this.runs.length > 0) {
      route.target = this.runs[0].id;
    }
    this.renderTabs(route.plugin);
    this.renderInputs(route);
    if (route.target === null) {
      clear(this.viewHost);
      this.viewHost.append(el("p", {}, ["No runs loaded yet."]));
      return;
    }
    const run = this.runs.find((r) => r.id === route.target);
    this.lastSeenHash = run?.hash ?? null;
    await this.submitAndRender(route);
  }

  private async submitAndRender(route: ViewRoute): Promise<void> {
    const seq = ++this.submitSeq;
    const progress = el("p", { class: "progress" }, ["computing…"]);
    clear(this.viewHost);
    this.viewHost.append(progress);
    let envelope: Envelope;
    try {
      const response = await this.api.submit(route.plugin, route.target!, route.inputs);
      envelope = await this.api.awaitResult(response, JOB_POLL_MS, (state) => {
        progress.textContent = `job ${state}…`;
      });
    } catch (err) {
      if (seq !== this.submitSeq) return;
      clear(this.viewHost);
      this.viewHost.append(
        errorCard(String(err), () => void this.submitAndRender(route)),
      );
      return;
    }
    if (seq !== this.submitSeq) return; // superseded by a newer navigation
    this.renderEnvelope(route, envelope);
  }

  private renderEnvelope(route: ViewRoute, envelope: Envelope): void {
    const host = this.viewHost;
    switch (route.plugin) {
      case "overview":
        renderOverview(host, envelope as never);
        break;
      case "budget_correlation":
        renderCorrelation(host, envelope as never);
        break;
      case "pareto":
        renderPareto(host, envelope as never, {
          onPointClick: (point: ParetoPoint) =>
            this.navigateToDetail(point.origin_run_id, point.origin_config_id),
        });
        break;
      case "footprint":
        renderFootprint(host, envelope as never, {
          onPointClick: (point: FootprintPoint) => {
            if (point.origin_run_id !== null && point.origin_config_id !== null) {
              this.navigateToDetail(point.origin_run_id, point.origin_config_id);
            }
          },
        });
        break;
      case "importance":
        renderImportance(host, envelope as never, {
          onMethodChange: (method) =>
            this.navigateView({ ...route, inputs: { ...route.inputs, method } }),
        });
        break;
    }
    if (envelope.warnings.length > 0) {
      const list = el("ul", { class: "warnings" });
      for (const warning of envelope.warnings) list.append(el("li", {}, [warning]));
      host.append(list);
    }
  }
}
