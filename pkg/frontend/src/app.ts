/** DOM wiring: login screen, comparison view, summary. */

import { ApiClient, ApiError } from "./api.js";
import { ComparisonView, SessionController, startSession } from "./session.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class App {
  private controller: SessionController | null = null;
  private busy = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient = new ApiClient(),
  ) {}

  start(): void {
    this.renderLogin();
  }

  // --- screens ---

  private renderLogin(message = ""): void {
    this.root.replaceChildren();
    const panel = el("div", "panel login-panel");
    panel.append(el("h1", "", "Reconstruction ranking"));
    panel.append(
      el(
        "p",
        "hint",
        "You will see an original slide next to several anonymous reconstructions. " +
          "Drag them into order from best to worst (or press the number keys).",
      ),
    );
    const input = el("input", "rater-input");
    input.placeholder = "rater id";
    input.autofocus = true;
    const button = el("button", "primary", "Start session");
    const error = el("p", "error-text", message);
    const begin = async () => {
      if (!input.value.trim()) return;
      button.disabled = true;
      try {
        this.controller = await startSession(this.api, input.value.trim());
        await this.advance();
      } catch (err) {
        this.renderLogin(describeError(err));
      }
    };
    button.onclick = begin;
    input.onkeydown = (event) => {
      if (event.key === "Enter") void begin();
    };
    panel.append(input, button, error);
    this.root.append(panel);
  }

  private async advance(): Promise<void> {
    const controller = this.controller;
    if (!controller) return;
    try {
      const view = await controller.loadNext();
      if (view === null) {
        this.renderSummary();
      } else {
        this.renderComparison(view);
      }
    } catch (err) {
      this.renderRetry(describeError(err), () => this.advance());
    }
  }

  private renderComparison(view: ComparisonView): void {
    const controller = this.controller!;
    this.root.replaceChildren();
    const { comparison, ranking } = view;

    const header = el("div", "header");
    header.append(el("span", "", `Sample ${(comparison.index ?? 0) + 1} of ${comparison.total}`));
    const bar = el("div", "progress");
    const fill = el("div", "progress-fill");
    const { ranked, total } = controller.progress;
    fill.style.width = `${(100 * ranked) / Math.max(total, 1)}%`;
    bar.append(fill);
    header.append(bar);
    this.root.append(header);

    const stage = el("div", "stage");

    const originalPane = el("div", "original-pane");
    originalPane.append(el("h2", "", "Original"));
    const original = el("img", "zoomable");
    original.src = comparison.original_url ?? "";
    original.alt = "original slide";
    originalPane.append(original);
    stage.append(originalPane);

    const candidatePane = el("div", "candidate-pane");
    candidatePane.append(el("h2", "", "Reconstructions (drag to rank, best first)"));
    const grid = el("div", "candidate-grid");
    const slots = el("ol", "rank-slots");
    const submit = el("button", "primary submit-button", "Submit ranking");
    const status = el("p", "error-text");

    const refresh = () => {
      grid.replaceChildren();
      for (const candidate of comparison.candidates) {
        if (ranking.placed.includes(candidate.label)) continue;
        grid.append(this.candidateCard(candidate.label, candidate.image_url, refresh, view));
      }
      slots.replaceChildren();
      ranking.placed.forEach((label, position) => {
        const item = el("li", "rank-slot filled");
        const candidate = comparison.candidates.find((c) => c.label === label)!;
        const thumb = el("img", "thumb zoomable");
        thumb.src = candidate.image_url;
        thumb.alt = `candidate ${label}`;
        item.append(el("span", "rank-number", `${position + 1}`), thumb, el("span", "label-chip", label));
        const undo = el("button", "ghost", "remove");
        undo.onclick = () => {
          ranking.remove(label);
          refresh();
        };
        item.draggable = true;
        item.ondragstart = (event) => event.dataTransfer?.setData("text/label", label);
        item.ondragover = (event) => event.preventDefault();
        item.ondrop = (event) => {
          event.preventDefault();
          const dragged = event.dataTransfer?.getData("text/label");
          if (dragged) {
            ranking.placeAt(dragged, position);
            refresh();
          }
        };
        item.append(undo);
        slots.append(item);
      });
      const remaining = ranking.unplaced.length;
      submit.disabled = !ranking.complete || this.busy;
      submit.textContent = ranking.complete
        ? "Submit ranking"
        : `Place ${remaining} more to submit`;
    };

    slots.ondragover = (event) => event.preventDefault();
    slots.ondrop = (event) => {
      event.preventDefault();
      const dragged = event.dataTransfer?.getData("text/label");
      if (dragged) {
        ranking.place(dragged);
        refresh();
      }
    };

    submit.onclick = async () => {
      if (this.busy || !ranking.complete) return;
      this.busy = true;
      submit.disabled = true;
      try {
        await controller.submitCurrent();
        this.busy = false;
        await this.advance();
      } catch (err) {
        this.busy = false;
        if (err instanceof ApiError && err.status === 409) {
          // already recorded server-side; move on
          await this.advance();
          return;
        }
        status.textContent = describeError(err);
        this.renderRetryBanner(status, submit);
        refresh();
      }
    };

    document.onkeydown = (event) => {
      const index = Number.parseInt(event.key, 10);
      if (Number.isInteger(index) && index >= 1 && index <= comparison.candidates.length) {
        const label = comparison.candidates[index - 1].label;
        ranking.place(label);
        refresh();
      }
    };

    candidatePane.append(grid, el("h2", "", "Your ranking"), slots, submit, status);
    stage.append(candidatePane);
    this.root.append(stage);
    refresh();
  }

  private candidateCard(
    label: string,
    imageUrl: string,
    refresh: () => void,
    view: ComparisonView,
  ): HTMLElement {
    const card = el("div", "candidate-card");
    card.draggable = true;
    const image = el("img", "zoomable");
    image.src = imageUrl;
    image.alt = `candidate ${label}`;
    card.append(image, el("span", "label-chip", label));
    card.ondragstart = (event) => event.dataTransfer?.setData("text/label", label);
    card.onclick = () => {
      view.ranking.place(label);
      refresh();
    };
    return card;
  }

  private renderRetryBanner(status: HTMLElement, submit: HTMLButtonElement): void {
    status.textContent = `${status.textContent} (your order is kept; press submit to retry)`;
    submit.disabled = false;
  }

  private renderRetry(message: string, retry: () => Promise<void>): void {
    this.root.replaceChildren();
    const panel = el("div", "panel");
    panel.append(el("h2", "", "Connection problem"));
    panel.append(el("p", "error-text", message));
    const button = el("button", "primary", "Retry");
    button.onclick = () => void retry();
    panel.append(button);
    this.root.append(panel);
  }

  private renderSummary(): void {
    const controller = this.controller!;
    document.onkeydown = null;
    this.root.replaceChildren();
    const panel = el("div", "panel");
    panel.append(el("h1", "", "Session complete"));
    const { ranked, total } = controller.progress;
    panel.append(el("p", "", `You ranked ${ranked} of ${total} samples. Thank you!`));
    const again = el("button", "primary", "Start another session");
    again.onclick = () => this.renderLogin();
    panel.append(again);
    this.root.append(panel);
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `Server rejected the request (${err.status}): ${err.message}`;
  if (err instanceof Error) return `Network problem: ${err.message}`;
  return "Unexpected error";
}
