import {
  Api,
  ApiError,
  Conflict,
  EntityRow,
  ErrorDetail,
  api as liveApi,
} from "./api";
import { clauseLine, highlightNile } from "./highlight";

type Author = "operator" | "system";
type MessageKind =
  | "utterance"
  | "entity-summary"
  | "nile-candidate"
  | "confirmation-request"
  | "deployment-preview"
  | "error";

export interface ChatMessage {
  author: Author;
  kind: MessageKind;
  payload: unknown;
}

const SESSION_KEY = "nile-session";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function detailText(detail: ErrorDetail | string): string {
  if (typeof detail === "string") return detail;
  return detail.guidance ?? detail.message ?? detail.error ?? "request failed";
}

interface Candidate {
  sessionId: string;
  text: string;
  pre: HTMLPreElement;
  editor: HTMLTextAreaElement;
  confirmBtn: HTMLButtonElement;
  editBtn: HTMLButtonElement;
  deployBtn: HTMLButtonElement;
  inlineError: HTMLElement;
  statusLine: HTMLElement;
  container: HTMLElement;
}

export class ChatApp {
  readonly log: ChatMessage[] = [];
  private readonly api: Api;
  private readonly storage: Storage;
  private messages!: HTMLElement;
  private input!: HTMLTextAreaElement;
  private sendBtn!: HTMLButtonElement;
  private banner!: HTMLElement;
  private bannerText!: HTMLElement;
  private retryBtn!: HTMLButtonElement;
  private counter!: HTMLElement;
  private retryAction: (() => void) | null = null;
  private lastUtterance = "";

  constructor(
    private readonly root: HTMLElement,
    apiImpl?: Api,
    storage?: Storage,
  ) {
    this.api = apiImpl ?? liveApi;
    this.storage = storage ?? window.sessionStorage;
    this.buildShell();
  }

  /** Fetch header metrics and recover any session stored for this tab. */
  async boot(): Promise<void> {
    try {
      await this.refreshMetrics();
    } catch (err) {
      if (err instanceof ApiError && err.status === 0) {
        this.showBanner("service unreachable", () => void this.boot());
        return;
      }
    }
    await this.restore();
  }

  private buildShell(): void {
    this.root.innerHTML = "";
    const header = el("header");
    header.append(el("h1", "", "nile chat"));
    this.counter = el("span", "badge");
    this.counter.id = "feedback-counter";
    this.counter.textContent = "feedback –";
    header.append(this.counter);

    this.banner = el("div", "banner hidden");
    this.banner.id = "banner";
    this.bannerText = el("span");
    this.retryBtn = el("button", "", "Retry");
    this.retryBtn.onclick = () => {
      const action = this.retryAction;
      this.hideBanner();
      action?.();
    };
    this.banner.append(this.bannerText, this.retryBtn);

    this.messages = el("main");
    this.messages.id = "messages";

    const bar = el("footer", "input-bar");
    this.input = el("textarea");
    this.input.id = "utterance";
    this.input.rows = 1;
    this.input.placeholder = "Describe a network intent...";
    this.sendBtn = el("button", "", "Send");
    this.sendBtn.id = "send";
    this.sendBtn.disabled = true;
    this.input.addEventListener("input", () => {
      this.sendBtn.disabled = this.input.value.trim() === "";
    });
    this.input.addEventListener("keydown", (event) => {
      if (event.key === "Enter" && !event.shiftKey) {
        event.preventDefault();
        if (!this.sendBtn.disabled) void this.sendUtterance();
      }
    });
    this.sendBtn.onclick = () => void this.sendUtterance();
    bar.append(this.input, this.sendBtn);

    this.root.append(header, this.banner, this.messages, bar);
  }

  private showBanner(text: string, retry: (() => void) | null): void {
    this.bannerText.textContent = text;
    this.retryAction = retry;
    this.retryBtn.classList.toggle("hidden", retry === null);
    this.banner.classList.remove("hidden");
  }

  private hideBanner(): void {
    this.banner.classList.add("hidden");
  }

  private addMessage(
    author: Author,
    kind: MessageKind,
    payload: unknown,
  ): HTMLElement {
    this.log.push({ author, kind, payload });
    const wrap = el("div", `msg ${author} ${kind}`);
    if (typeof payload === "string") wrap.textContent = payload;
    this.messages.append(wrap);
    this.messages.scrollTop = this.messages.scrollHeight;
    return wrap;
  }

  async refreshMetrics() {
    const metrics = await this.api.metrics();
    this.counter.textContent = `feedback ${metrics.feedback_count}`;
    return metrics;
  }

  async sendUtterance(): Promise<void> {
    const text = this.input.value.trim();
    if (!text) return;
    this.lastUtterance = text;
    this.input.value = "";
    this.sendBtn.disabled = true;
    this.addMessage("operator", "utterance", text);
    try {
      const resp = await this.api.sendIntent(text);
      this.storage.setItem(SESSION_KEY, resp.session_id);
      this.renderEntities(resp.entities);
      for (const warning of resp.warnings) {
        this.addMessage("system", "error", `warning: ${warning}`);
      }
      this.renderCandidate(resp.session_id, resp.nile_text, "awaiting-confirmation");
    } catch (err) {
      this.handleSendError(err);
    }
  }

  private handleSendError(err: unknown): void {
    if (err instanceof ApiError && err.status === 0) {
      // keep the utterance so Retry can resend it verbatim
      this.showBanner("service unreachable", () => {
        this.input.value = this.lastUtterance;
        this.input.dispatchEvent(new Event("input"));
        void this.sendUtterance();
      });
      return;
    }
    if (err instanceof ApiError) {
      this.addMessage("system", "error", detailText(err.detail));
      return;
    }
    throw err;
  }

  private renderEntities(entities: EntityRow[]): void {
    const wrap = this.addMessage("system", "entity-summary", entities);
    for (const entity of entities) {
      wrap.append(el("span", "chip", `${entity.kind}: ${entity.value}`));
    }
  }

  /** Candidate program block: highlighted code, edit toggle, confirm and
   * deploy actions. The displayed text always equals what the service
   * returned or what the operator typed, byte for byte. */
  private renderCandidate(
    sessionId: string,
    text: string,
    status: string,
  ): Candidate {
    const container = this.addMessage("system", "nile-candidate", {
      sessionId,
      text,
    });

    const pre = el("pre", "nile");
    pre.innerHTML = highlightNile(text);
    const editor = el("textarea", "editor hidden");
    editor.value = text;
    editor.rows = Math.max(4, text.split("\n").length + 1);

    const actions = el("div", "actions");
    const confirmBtn = el("button", "confirm", "Confirm");
    const editBtn = el("button", "edit", "Edit");
    const deployBtn = el("button", "deploy", "Preview deploy");
    deployBtn.disabled = true;
    actions.append(confirmBtn, editBtn, deployBtn);

    const inlineError = el("div", "inline-error hidden");
    const statusLine = el("div", "status-line");

    container.append(pre, editor, actions, inlineError, statusLine);
    this.log.push({
      author: "system",
      kind: "confirmation-request",
      payload: { sessionId },
    });

    const candidate: Candidate = {
      sessionId, text, pre, editor, confirmBtn, editBtn, deployBtn,
      inlineError, statusLine, container,
    };
    editBtn.onclick = () => {
      editor.classList.toggle("hidden");
      if (!editor.classList.contains("hidden")) editor.focus();
    };
    confirmBtn.onclick = () => void this.confirm(candidate);
    deployBtn.onclick = () => void this.deploy(candidate);
    this.applyStatus(candidate, status);
    return candidate;
  }

  private applyStatus(candidate: Candidate, status: string): void {
    const confirmed = status === "confirmed" || status === "corrected";
    const terminal = status === "deployed" || status === "failed";
    candidate.confirmBtn.disabled = confirmed || terminal;
    candidate.editBtn.disabled = confirmed || terminal;
    candidate.deployBtn.disabled = !confirmed;
    if (status !== "awaiting-confirmation") {
      candidate.statusLine.textContent = status;
    }
  }

  private async confirm(candidate: Candidate): Promise<void> {
    const editing = !candidate.editor.classList.contains("hidden");
    const edited = candidate.editor.value;
    const corrected =
      editing && edited !== candidate.text ? edited : undefined;
    candidate.inlineError.classList.add("hidden");
    try {
      const resp = await this.api.confirm(candidate.sessionId, corrected);
      candidate.text = corrected ?? candidate.text;
      candidate.pre.innerHTML = highlightNile(candidate.text);
      candidate.editor.value = candidate.text;
      candidate.editor.classList.add("hidden");
      this.applyStatus(candidate, resp.status);
      candidate.statusLine.textContent = "learning from your feedback";
      try {
        const metrics = await this.refreshMetrics();
        candidate.statusLine.textContent =
          `learning from your feedback (${metrics.feedback_count} so far, ` +
          `dataset ${metrics.dataset_size})`;
      } catch {
        // metrics are cosmetic here; confirmation already succeeded
      }
    } catch (err) {
      this.handleConfirmError(candidate, err);
    }
  }

  private handleConfirmError(candidate: Candidate, err: unknown): void {
    if (!(err instanceof ApiError)) throw err;
    if (err.status === 0) {
      this.showBanner("service unreachable", () => void this.confirm(candidate));
      return;
    }
    const detail = err.detail;
    if (
      err.status === 400 &&
      typeof detail === "object" &&
      detail.line !== undefined
    ) {
      // parse error: point at the offending line, keep the edit in place
      candidate.inlineError.textContent =
        `line ${detail.line}, col ${detail.col}: ${detail.message}`;
      candidate.inlineError.classList.remove("hidden");
      this.markLine(candidate, detail.line, "error-line");
      return;
    }
    candidate.inlineError.textContent = detailText(detail);
    candidate.inlineError.classList.remove("hidden");
  }

  private markLine(
    candidate: Candidate,
    line: number,
    className: string,
  ): void {
    const editing = !candidate.editor.classList.contains("hidden");
    const source = editing ? candidate.editor.value : candidate.text;
    if (editing) {
      // the pre mirrors the editor while an edit is being corrected
      candidate.pre.innerHTML = highlightNile(source);
    }
    const span = candidate.pre.querySelector(`.line[data-line="${line}"]`);
    span?.classList.add(className);
  }

  private async deploy(candidate: Candidate): Promise<void> {
    candidate.inlineError.classList.add("hidden");
    try {
      const resp = await this.api.deploy(candidate.sessionId);
      this.renderPreview(candidate, resp.commands, resp.conflicts, resp.deployable);
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      if (err.status === 0) {
        this.showBanner("service unreachable", () => void this.deploy(candidate));
        return;
      }
      if (err.status === 409) {
        candidate.inlineError.textContent = "confirm the program first";
        candidate.inlineError.classList.remove("hidden");
        return;
      }
      candidate.inlineError.textContent = detailText(err.detail);
      candidate.inlineError.classList.remove("hidden");
    }
  }

  private renderPreview(
    candidate: Candidate,
    commands: string[],
    conflicts: Conflict[],
    deployable: boolean,
  ): void {
    const wrap = this.addMessage("system", "deployment-preview", {
      commands,
      conflicts,
      deployable,
    });
    const terminal = el("pre", "terminal");
    for (const command of commands) {
      terminal.append(el("div", "cmd", command));
    }
    wrap.append(terminal);
    for (const conflict of conflicts) {
      wrap.append(
        el(
          "div",
          `conflict severity-${conflict.severity}`,
          `${conflict.severity}: ${conflict.message}`,
        ),
      );
      const line = clauseLine(candidate.text, conflict.clause);
      if (line && conflict.severity === "error") {
        this.markLine(candidate, line, "conflict-line");
      }
    }
    candidate.deployBtn.disabled = true;
    candidate.statusLine.textContent = deployable
      ? "deployed (dry run)"
      : "deploy blocked: resolve conflicts";
    wrap.classList.toggle("blocked", !deployable);
  }

  /** Rebuild the conversation for the session this tab had open. */
  private async restore(): Promise<void> {
    const sessionId = this.storage.getItem(SESSION_KEY);
    if (!sessionId) return;
    try {
      const snap = await this.api.session(sessionId);
      this.addMessage("operator", "utterance", snap.utterance);
      this.renderEntities(snap.entities);
      this.renderCandidate(
        snap.session_id,
        snap.corrected_nile ?? snap.nile_text,
        snap.status,
      );
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.storage.removeItem(SESSION_KEY);
        return;
      }
      if (err instanceof ApiError && err.status === 0) {
        this.showBanner("service unreachable", () => void this.boot());
        return;
      }
      throw err;
    }
  }
}
