// Order-preserving offline queue for judgment submissions.
// Pending entries survive a reload via the injected storage.

import { JudgmentSubmission } from './types'

export interface KeyValueStorage {
  getItem(key: string): string | null
  setItem(key: string, value: string): void
}

const STORAGE_KEY = 'docrepair-anno-pending'

export class JudgmentQueue {
  private pending: JudgmentSubmission[] = []

  constructor(private storage?: KeyValueStorage) {
    const saved = storage?.getItem(STORAGE_KEY)
    if (saved) {
      try {
        this.pending = JSON.parse(saved) as JudgmentSubmission[]
      } catch {
        this.pending = []
      }
    }
  }

  get size(): number {
    return this.pending.length
  }

  push(submission: JudgmentSubmission): void {
    this.pending.push(submission)
    this.persist()
  }

  /**
   * Send queued judgments in arrival order. Stops at the first transport
   * failure (entry stays queued); duplicate rejections (409) count as
   * delivered, since the backend already holds a judgment for the task.
   */
  async flush(
    send: (s: JudgmentSubmission) => Promise<void>,
    isDuplicate: (err: unknown) => boolean = () => false,
  ): Promise<number> {
    let delivered = 0
    while (this.pending.length > 0) {
      const head = this.pending[0]
      try {
        await send(head)
      } catch (err) {
        if (!isDuplicate(err)) {
          this.persist()
          return delivered
        }
      }
      this.pending.shift()
      delivered += 1
    }
    this.persist()
    return delivered
  }

  private persist(): void {
    this.storage?.setItem(STORAGE_KEY, JSON.stringify(this.pending))
  }
}
