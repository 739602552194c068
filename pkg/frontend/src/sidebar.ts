// Sidebar panel: state machine and rendering. Pure DOM + fetch so the whole
// flow is testable without a browser extension runtime.
import { ApiError, TosQaClient } from "./api";
import { PageScanResult, scanTosLinks } from "./linkscan";
import { platformIdGuess } from "./slug";

export type SidebarMode = "loading" | "qa" | "prompt" | "silent" | "error";

export async function scanPage(doc: Document, pageUrl: string,
                               client: TosQaClient): Promise<PageScanResult> {
  const origin = new URL(pageUrl).origin;
  const guess = platformIdGuess(pageUrl);
  let indexed = false;
  const status = await client.getPlatform(guess);
  indexed = status.status === "indexed";
  return {
    origin,
    platformIdGuess: guess,
    detectedLinks: indexed ? [] : scanTosLinks(doc, pageUrl),
    indexed,
  };
}

export class SidebarController {
  mode: SidebarMode = "loading";
  private seq = 0;

  constructor(
    private root: HTMLElement,
    private client: TosQaClient,
    public platformId: string = "",
  ) {}

  /** Branches on page load: Q&A for indexed platforms, a queue prompt when
   *  ToS-looking links exist, silence otherwise, a passive badge on API
   *  failure. */
  async onPageLoad(doc: Document, pageUrl: string): Promise<SidebarMode> {
    let scan: PageScanResult;
    try {
      scan = await scanPage(doc, pageUrl, this.client);
    } catch {
      this.mode = "error";
      this.renderErrorBadge();
      return this.mode;
    }
    this.platformId = scan.platformIdGuess;
    if (scan.indexed) {
      this.mode = "qa";
      this.renderQaPanel();
    } else if (scan.detectedLinks.length > 0) {
      this.mode = "prompt";
      this.renderQueuePrompt(scan.detectedLinks[0]);
    } else {
      this.mode = "silent";
      this.root.innerHTML = "";
    }
    return this.mode;
  }

  /** Ask a question; stale responses (superseded by a newer ask) are dropped. */
  async ask(question: string): Promise<void> {
    const mySeq = ++this.seq;
    const card = this.ensure("tosqa-answer-card");
    card.className = "tosqa-card tosqa-card-pending";
    card.textContent = "Searching the terms...";
    try {
      const answer = await this.client.query(this.platformId, question);
      if (mySeq !== this.seq) return; // a newer question is in flight
      if (answer.accepted) {
        card.className = "tosqa-card tosqa-card-accepted";
        card.innerHTML = "";
        card.appendChild(this.badge("relevant", "tosqa-badge-green"));
        const text = document.createElement("p");
        text.className = "tosqa-answer-text";
        text.textContent = answer.answer;
        card.appendChild(text);
        card.appendChild(this.scoreLine(answer.similarity, answer.relevance));
      } else {
        card.className = "tosqa-card tosqa-card-fallback";
        card.innerHTML = "";
        card.appendChild(this.badge("no valid answer", "tosqa-badge-amber"));
        const text = document.createElement("p");
        text.className = "tosqa-fallback-text";
        text.textContent = answer.fallback ?? "No valid answer could be found.";
        card.appendChild(text);
        const diag = document.createElement("p");
        diag.className = "tosqa-diagnostic";
        diag.textContent = `closest (rejected) passage: ${answer.answer}`;
        card.appendChild(diag);
        card.appendChild(this.scoreLine(answer.similarity, answer.relevance));
      }
    } catch (err) {
      if (mySeq !== this.seq) return;
      if (err instanceof ApiError && err.status === 404) {
        // Platform vanished from the index: fall back to the unindexed flow.
        await this.onPageLoad(document, window.location.href);
        return;
      }
      card.className = "tosqa-card tosqa-card-error";
      card.innerHTML = "";
      card.textContent = "Could not reach the answer service. ";
      const retry = document.createElement("button");
      retry.className = "tosqa-retry";
      retry.textContent = "Retry";
      retry.addEventListener("click", () => void this.ask(question));
      card.appendChild(retry);
    }
  }

  /** Queue the platform for crawling after the user confirms. */
  async confirmQueue(link: string): Promise<void> {
    const prompt = this.ensure("tosqa-queue-prompt");
    const inline = this.ensure("tosqa-inline-error", prompt);
    inline.textContent = "";
    if (!/^https?:\/\//i.test(link)) {
      inline.textContent = "Enter an absolute http(s) URL.";
      return;
    }
    try {
      const result = await this.client.submitCrawl(link);
      this.toast(`Queued for crawling (entry ${result.entry_id}). ` +
                 "Check back once indexing finishes.");
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        inline.textContent = err.message;
        return;
      }
      this.toast("Could not reach the service; try again later.");
    }
  }

  // --- rendering ------------------------------------------------------

  private renderQaPanel(): void {
    this.root.innerHTML = "";
    const panel = document.createElement("div");
    panel.id = "tosqa-qa-panel";
    panel.className = "tosqa-panel";
    const heading = document.createElement("h2");
    heading.textContent = "Ask about the terms";
    panel.appendChild(heading);
    const input = document.createElement("input");
    input.id = "tosqa-question-input";
    input.type = "text";
    input.placeholder = "e.g. Can I delete my account and data?";
    panel.appendChild(input);
    const button = document.createElement("button");
    button.id = "tosqa-ask-button";
    button.textContent = "Ask";
    button.addEventListener("click", () => {
      if (input.value.trim()) void this.ask(input.value.trim());
    });
    panel.appendChild(button);
    this.root.appendChild(panel);
  }

  private renderQueuePrompt(prefill: string): void {
    this.root.innerHTML = "";
    const prompt = document.createElement("div");
    prompt.id = "tosqa-queue-prompt";
    prompt.className = "tosqa-panel";
    const text = document.createElement("p");
    text.textContent = "This platform is not indexed yet. Queue its terms for crawling?";
    prompt.appendChild(text);
    const input = document.createElement("input");
    input.id = "tosqa-queue-link";
    input.type = "text";
    input.value = prefill;
    prompt.appendChild(input);
    const confirm = document.createElement("button");
    confirm.id = "tosqa-queue-confirm";
    confirm.textContent = "Queue platform";
    confirm.addEventListener("click", () => void this.confirmQueue(input.value.trim()));
    prompt.appendChild(confirm);
    const inline = document.createElement("p");
    inline.id = "tosqa-inline-error";
    inline.className = "tosqa-inline-error";
    prompt.appendChild(inline);
    this.root.appendChild(prompt);
  }

  private renderErrorBadge(): void {
    this.root.innerHTML = "";
    const badge = document.createElement("div");
    badge.id = "tosqa-error-badge";
    badge.title = "tosqa service unreachable";
    badge.textContent = "ToS?";
    this.root.appendChild(badge);
  }

  private ensure(id: string, parent?: HTMLElement): HTMLElement {
    let el = this.root.querySelector<HTMLElement>(`#${id}`);
    if (!el) {
      el = document.createElement("div");
      el.id = id;
      (parent ?? this.root).appendChild(el);
    }
    return el;
  }

  private badge(label: string, cls: string): HTMLElement {
    const badge = document.createElement("span");
    badge.className = `tosqa-badge ${cls}`;
    badge.textContent = label;
    return badge;
  }

  private scoreLine(similarity: number, relevance: number): HTMLElement {
    const line = document.createElement("p");
    line.className = "tosqa-scores";
    line.textContent = `similarity ${similarity.toFixed(3)} | relevance ${relevance.toFixed(3)}`;
    return line;
  }

  private toast(message: string): void {
    const toast = this.ensure("tosqa-toast");
    toast.className = "tosqa-toast";
    toast.textContent = message;
  }
}
