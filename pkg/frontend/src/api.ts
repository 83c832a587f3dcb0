// Thin typed client over the documented annotation API.

import { JudgmentSubmission, NextTaskResponse, Stats, parseNextTask } from './types'

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message)
  }
}

export class ApiClient {
  constructor(
    private base: string = '',
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson(path: string): Promise<unknown> {
    const resp = await this.fetchFn(`${this.base}${path}`)
    if (!resp.ok) {
      throw new ApiError(resp.status, `GET ${path} failed with ${resp.status}`)
    }
    return resp.json()
  }

  async nextTask(annotator: string): Promise<NextTaskResponse> {
    const raw = await this.getJson(
      `/api/tasks/next?annotator=${encodeURIComponent(annotator)}`,
    )
    return parseNextTask(raw)
  }

  async submitJudgment(submission: JudgmentSubmission): Promise<void> {
    const resp = await this.fetchFn(
      `${this.base}/api/tasks/${encodeURIComponent(submission.taskId)}/judgment`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({
          annotator: submission.annotator,
          choice: submission.choice,
        }),
      },
    )
    if (!resp.ok) {
      let detail = `${resp.status}`
      try {
        const body = (await resp.json()) as { error?: string }
        if (body.error) detail = body.error
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, detail)
    }
  }

  async stats(): Promise<Stats> {
    return (await this.getJson('/api/stats')) as Stats
  }
}
