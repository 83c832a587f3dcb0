// Payload types for the annotation HTTP API, plus runtime validators.
// The task view deliberately has no room for model-origin information;
// parseTaskView rejects any payload that tries to smuggle it in.

export interface TaskView {
  taskId: string
  source: string[]
  a: string[]
  b: string[]
}

export interface Progress {
  judged: number
  total: number
}

export interface NextTaskResponse {
  task: TaskView | null
  progress: Progress
}

export type Choice = 'A' | 'B' | 'equal'

export interface JudgmentSubmission {
  taskId: string
  choice: Choice
  annotator: string
}

export interface Stats {
  total_tasks: number
  judged: number
  equal: number
  repaired_better: number
  baseline_better: number
  percent_equal: number
  percent_repaired_better: number
  percent_baseline_better: number
  decided: number
  percent_preference_among_decided: number
}

// keys that would break annotator blindness if a backend ever leaked them
const FORBIDDEN_KEYS = ['origin', 'origin_a', 'origin_b', 'model', 'system', 'resolved']

function stringList(value: unknown, what: string): string[] {
  if (!Array.isArray(value) || !value.every((s) => typeof s === 'string')) {
    throw new Error(`${what} must be a list of strings`)
  }
  return value as string[]
}

export function parseTaskView(raw: unknown): TaskView {
  if (typeof raw !== 'object' || raw === null) {
    throw new Error('task payload must be an object')
  }
  const record = raw as Record<string, unknown>
  for (const key of Object.keys(record)) {
    const lowered = key.toLowerCase()
    if (FORBIDDEN_KEYS.some((bad) => lowered.includes(bad))) {
      throw new Error(`task payload leaks origin information via key "${key}"`)
    }
  }
  if (typeof record.task_id !== 'string') {
    throw new Error('task payload missing task_id')
  }
  const view: TaskView = {
    taskId: record.task_id,
    source: stringList(record.source, 'source'),
    a: stringList(record.a, 'a'),
    b: stringList(record.b, 'b'),
  }
  // the backend filters full copies; guard against it regressing
  const norm = (ss: string[]) => ss.map((s) => s.trim().split(/\s+/).join(' ')).join('\n')
  if (norm(view.a) === norm(view.b)) {
    throw new Error(`task ${view.taskId}: candidates A and B are identical`)
  }
  return view
}

export function parseNextTask(raw: unknown): NextTaskResponse {
  const record = raw as { task?: unknown; progress?: { judged?: unknown; total?: unknown } }
  const progress = record.progress
  if (
    !progress ||
    typeof progress.judged !== 'number' ||
    typeof progress.total !== 'number'
  ) {
    throw new Error('next-task payload missing progress counters')
  }
  return {
    task: record.task == null ? null : parseTaskView(record.task),
    progress: { judged: progress.judged, total: progress.total },
  }
}
