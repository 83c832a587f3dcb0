// The single-page annotation flow: fetch a task, show both translations
// side by side with sentence diffs, record one judgment, advance. When the
// queue drains, show the backend's aggregate numbers verbatim.

import { ApiClient, ApiError } from './api'
import { diffGroups } from './diff'
import { JudgmentQueue } from './queue'
import { Choice, Stats, TaskView } from './types'

const INSTRUCTIONS =
  'Pick which translation is better: (1) the first, (2) the second, or ' +
  '(3) equal quality. Please avoid the third answer if you can give a preference.'

export interface AppOptions {
  annotator: string
  online?: () => boolean
}

export class AnnotationApp {
  private current: TaskView | null = null
  private submitting = false
  private queue: JudgmentQueue
  private keyHandler = (ev: KeyboardEvent) => this.onKey(ev)

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private options: AppOptions,
    storage?: { getItem(k: string): string | null; setItem(k: string, v: string): void },
  ) {
    this.queue = new JudgmentQueue(storage)
  }

  async start(): Promise<void> {
    this.root.ownerDocument.addEventListener('keydown', this.keyHandler)
    await this.advance()
  }

  stop(): void {
    this.root.ownerDocument.removeEventListener('keydown', this.keyHandler)
  }

  /** Flush anything queued offline, then render the next pending task. */
  async advance(): Promise<void> {
    try {
      await this.queue.flush(
        (s) => this.api.submitJudgment(s),
        (err) => err instanceof ApiError && err.status === 409,
      )
      const next = await this.api.nextTask(this.options.annotator)
      if (next.task === null) {
        this.renderDone(await this.api.stats())
      } else {
        this.renderTask(next.task, next.progress.judged, next.progress.total)
      }
    } catch {
      this.renderOffline()
    }
  }

  private onKey(ev: KeyboardEvent): void {
    const mapping: Record<string, Choice> = { '1': 'A', '2': 'B', '3': 'equal' }
    const choice = mapping[ev.key]
    if (choice && this.current) {
      void this.submit(choice)
    }
  }

  async submit(choice: Choice): Promise<void> {
    if (!this.current || this.submitting) {
      return
    }
    this.submitting = true
    const submission = {
      taskId: this.current.taskId,
      choice,
      annotator: this.options.annotator,
    }
    this.current = null // one judgment per rendered task
    try {
      if (this.options.online && !this.options.online()) {
        throw new ApiError(0, 'offline')
      }
      await this.api.submitJudgment(submission)
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.showNotice('This task was already judged; moving on.')
      } else {
        this.queue.push(submission)
        this.showNotice('Offline: judgment queued, will send on reconnect.')
      }
    } finally {
      this.submitting = false
    }
    await this.advance()
  }

  renderTask(view: TaskView, judged: number, total: number): void {
    this.current = view
    const diffs = diffGroups(view.a, view.b)
    const sentenceHtml = (words: { word: string; changed: boolean }[]) =>
      words
        .map((w) => (w.changed ? `<mark>${escapeHtml(w.word)}</mark>` : escapeHtml(w.word)))
        .join(' ')
    const rows = diffs
      .map(
        (d) => `
        <tr class="${d.differs ? 'differs' : ''}">
          <td class="candidate">${sentenceHtml(d.aWords)}</td>
          <td class="candidate">${sentenceHtml(d.bWords)}</td>
        </tr>`,
      )
      .join('')
    this.root.innerHTML = `
      <header>
        <h1>Translation comparison</h1>
        <div id="progress">${judged} / ${total} judged</div>
      </header>
      <p class="instructions">${INSTRUCTIONS}</p>
      <section id="source">
        <h2>Source sentences</h2>
        ${view.source.map((s) => `<p>${escapeHtml(s)}</p>`).join('')}
      </section>
      <table id="candidates">
        <thead><tr><th>Translation 1</th><th>Translation 2</th></tr></thead>
        <tbody>${rows}</tbody>
      </table>
      <div id="controls">
        <button id="choose-a">1 — first is better</button>
        <button id="choose-b">2 — second is better</button>
        <button id="choose-equal" class="deemphasized">3 — equal quality</button>
      </div>
      <div id="notice"></div>
    `
    this.bind('choose-a', 'A')
    this.bind('choose-b', 'B')
    this.bind('choose-equal', 'equal')
  }

  private bind(id: string, choice: Choice): void {
    const el = this.root.querySelector(`#${id}`)
    el?.addEventListener('click', () => void this.submit(choice))
  }

  renderDone(stats: Stats): void {
    // per-task blindness is preserved by the server-side A/B shuffle; the
    // aggregate screen is the experiment's summary, numbers verbatim
    this.current = null
    this.root.innerHTML = `
      <header><h1>All tasks judged</h1></header>
      <section id="aggregate">
        <p>${stats.judged} of ${stats.total_tasks} tasks judged.</p>
        <table>
          <tr><td>equal quality</td>
              <td>${stats.equal}</td><td>${stats.percent_equal}%</td></tr>
          <tr><td>corrected translation better</td>
              <td>${stats.repaired_better}</td><td>${stats.percent_repaired_better}%</td></tr>
          <tr><td>baseline translation better</td>
              <td>${stats.baseline_better}</td><td>${stats.percent_baseline_better}%</td></tr>
        </table>
        <p id="preference">
          Corrected preferred in ${stats.percent_preference_among_decided}% of decided judgments.
        </p>
      </section>
    `
  }

  renderOffline(): void {
    this.root.innerHTML = `
      <header><h1>Connection problem</h1></header>
      <p>The annotation service is unreachable. Nothing was lost
         (${this.queue.size} judgment(s) queued).</p>
      <button id="retry">Retry</button>
    `
    this.root.querySelector('#retry')?.addEventListener('click', () => void this.advance())
  }

  private showNotice(text: string): void {
    const el = this.root.querySelector('#notice')
    if (el) {
      el.textContent = text
    }
  }
}

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}
