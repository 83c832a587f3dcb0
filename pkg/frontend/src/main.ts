import { ApiClient } from './api'
import { AnnotationApp } from './app'

function annotatorId(): string {
  const params = new URLSearchParams(window.location.search)
  const fromUrl = params.get('annotator')
  if (fromUrl) {
    return fromUrl
  }
  const saved = window.localStorage.getItem('docrepair-annotator')
  if (saved) {
    return saved
  }
  const generated = `anon-${Math.random().toString(36).slice(2, 8)}`
  window.localStorage.setItem('docrepair-annotator', generated)
  return generated
}

const root = document.getElementById('app')
if (root) {
  const app = new AnnotationApp(
    root,
    new ApiClient(''),
    { annotator: annotatorId(), online: () => navigator.onLine },
    window.localStorage,
  )
  window.addEventListener('online', () => void app.advance())
  void app.start()
}
