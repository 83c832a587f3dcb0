// In-memory double of the documented annotation API for UI tests.
// Mirrors the backend semantics: blind task views, single judgment per
// task, 409 on duplicates, aggregate percentages over the task total.

export interface FixtureTask {
  task_id: string
  source: string[]
  a: string[]
  b: string[]
  origin_a: 'baseline' | 'repaired'
}

export function makeFixtureTasks(n: number): FixtureTask[] {
  const tasks: FixtureTask[] = []
  for (let i = 0; i < n; i++) {
    tasks.push({
      task_id: `t${String(i).padStart(5, '0')}`,
      source: [0, 1, 2, 3].map((j) => `source ${i} sentence ${j}`),
      a: [0, 1, 2, 3].map((j) => `candidate-a ${i} sentence ${j}`),
      b: [0, 1, 2, 3].map((j) => `candidate-b ${i} sentence ${j}`),
      origin_a: i % 2 === 0 ? 'repaired' : 'baseline',
    })
  }
  return tasks
}

export class FakeServer {
  judgments = new Map<string, string>()

  constructor(private tasks: FixtureTask[]) {}

  resolved(taskId: string, choice: string): string {
    if (choice === 'equal') return 'equal'
    const task = this.tasks.find((t) => t.task_id === taskId)!
    const chosen = choice === 'A' ? task.origin_a : task.origin_a === 'repaired' ? 'baseline' : 'repaired'
    return chosen === 'repaired' ? 'repaired_better' : 'baseline_better'
  }

  stats() {
    const counts = { equal: 0, repaired_better: 0, baseline_better: 0 }
    for (const [taskId, choice] of this.judgments) {
      counts[this.resolved(taskId, choice) as keyof typeof counts] += 1
    }
    const total = this.tasks.length
    const decided = counts.repaired_better + counts.baseline_better
    const pct = (x: number, d: number) => (d ? Math.round((100 * x) / d) : 0)
    return {
      total_tasks: total,
      judged: this.judgments.size,
      equal: counts.equal,
      repaired_better: counts.repaired_better,
      baseline_better: counts.baseline_better,
      percent_equal: pct(counts.equal, total),
      percent_repaired_better: pct(counts.repaired_better, total),
      percent_baseline_better: pct(counts.baseline_better, total),
      decided,
      percent_preference_among_decided: pct(counts.repaired_better, decided),
    }
  }

  /** A fetch-compatible function bound to this server. */
  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = typeof input === 'string' ? input : input.toString()
    const path = url.replace(/^https?:\/\/[^/]+/, '')
    if (path.startsWith('/api/tasks/next')) {
      const pending = this.tasks.find((t) => !this.judgments.has(t.task_id))
      const view = pending
        ? {
            task_id: pending.task_id,
            source: pending.source,
            a: pending.a,
            b: pending.b,
          }
        : null
      return jsonResponse(200, {
        task: view,
        progress: { judged: this.judgments.size, total: this.tasks.length },
      })
    }
    const judgment = path.match(/^\/api\/tasks\/([^/]+)\/judgment$/)
    if (judgment && init?.method === 'POST') {
      const taskId = decodeURIComponent(judgment[1])
      const body = JSON.parse(String(init.body)) as { choice: string }
      if (!this.tasks.some((t) => t.task_id === taskId)) {
        return jsonResponse(404, { error: `unknown task ${taskId}` })
      }
      if (this.judgments.has(taskId)) {
        return jsonResponse(409, { error: 'task already judged' })
      }
      if (!['A', 'B', 'equal'].includes(body.choice)) {
        return jsonResponse(400, { error: 'bad choice' })
      }
      this.judgments.set(taskId, body.choice)
      return jsonResponse(200, { ok: true, task_id: taskId })
    }
    if (path === '/api/stats') {
      return jsonResponse(200, this.stats())
    }
    return jsonResponse(404, { error: 'not found' })
  }
}

function jsonResponse(status: number, payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { 'Content-Type': 'application/json' },
  })
}

export class MemoryStorage {
  private map = new Map<string, string>()

  getItem(key: string): string | null {
    return this.map.get(key) ?? null
  }

  setItem(key: string, value: string): void {
    this.map.set(key, value)
  }
}
