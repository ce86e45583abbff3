// Browser shell: connection form, live chair view, alert tones, daily report.

import { AudioPolicy } from './audio.js'
import { TonePlayer } from './player.js'
import { renderChair, type ChairViewModel } from './render.js'
import { SessionController, type ChairSocket } from './session.js'

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id)
  if (!el) throw new Error(`missing element #${id}`)
  return el as T
}

function browserSocket(url: string): ChairSocket {
  const ws = new WebSocket(url)
  const wrapper: ChairSocket = {
    send: (text) => ws.send(text),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  }
  ws.onopen = () => wrapper.onopen?.()
  ws.onmessage = (event) => wrapper.onmessage?.(String(event.data))
  ws.onclose = () => wrapper.onclose?.()
  return wrapper
}

const audioPolicy = new AudioPolicy()
const player = new TonePlayer()

const session = new SessionController(browserSocket, {
  onPhase(phase) {
    $('phase').textContent = phase
    $<HTMLButtonElement>('btn-login').disabled = phase !== 'Connected'
    $<HTMLButtonElement>('btn-logout').disabled = phase !== 'LoggedIn'
    $<HTMLButtonElement>('btn-connect').disabled = phase !== 'Disconnected'
    if (phase !== 'LoggedIn') player.perform(audioPolicy.reset())
    if (phase === 'Disconnected') report(`disconnected - reconnect when ready`)
  },
  onData(msg) {
    if (msg.chdata.actual_sitting_status === 1) {
      player.perform(audioPolicy.observe(msg.chdata.actual_sitting_state))
    } else {
      player.perform(audioPolicy.reset())
    }
  },
  onStatus(msg) {
    report(`${msg.query} -> ${msg.success ? 'ok' : `refused (${msg.reason ?? 'unknown'})`}`)
  },
  onLog(entry) {
    report(entry)
  },
})

function report(line: string): void {
  const log = $('event-log')
  const item = document.createElement('div')
  item.textContent = `${new Date().toLocaleTimeString()}  ${line}`
  log.prepend(item)
  while (log.childElementCount > 60) log.lastElementChild?.remove()
}

// -- rendering ----------------------------------------------------------------

function draw(view: ChairViewModel): void {
  const svg = $('chair-svg')
  svg.querySelectorAll('.sensor').forEach((n) => n.remove())
  const ns = 'http://www.w3.org/2000/svg'
  for (const circle of view.circles) {
    const group = document.createElementNS(ns, 'g')
    group.classList.add('sensor')
    const dot = document.createElementNS(ns, 'circle')
    dot.setAttribute('cx', String(circle.x * 220))
    dot.setAttribute('cy', String(circle.y * 260))
    dot.setAttribute('r', '22')
    dot.setAttribute('fill', circle.color)
    const text = document.createElementNS(ns, 'text')
    text.setAttribute('x', String(circle.x * 220))
    text.setAttribute('y', String(circle.y * 260 + 4))
    text.setAttribute('text-anchor', 'middle')
    text.textContent = circle.label
    group.append(dot, text)
    svg.appendChild(group)
  }
  const scale = $('scale-panel')
  scale.innerHTML = ''
  for (const color of [...view.scale].reverse()) {
    const stop = document.createElement('div')
    stop.style.background = color
    scale.appendChild(stop)
  }
  const panel = $('state-panel')
  panel.style.background = view.statePanel.color
  panel.textContent = view.statePanel.label
  $('free-label').style.display = view.freeLabel ? 'block' : 'none'
  $('hint').textContent = view.hint ?? ''
}

function refresh(): void {
  const view = renderChair(session.latest?.chdata ?? null, session.latest?.data ?? null, {
    nowMs: Date.now(),
    lastFrameAtMs: session.lastFrameAtMs,
    connected: session.phase !== 'Disconnected',
  })
  draw(view)
}

setInterval(refresh, 500)
refresh()

// -- controls -------------------------------------------------------------------

$('btn-connect').addEventListener('click', () => {
  const server = $<HTMLInputElement>('server').value || '127.0.0.1'
  const port = Number($<HTMLInputElement>('port').value || '8765')
  const chair = Number($<HTMLInputElement>('chair').value || '1')
  session.connect(server, port, chair, {
    user: $<HTMLInputElement>('user').value,
    password: $<HTMLInputElement>('password').value,
  })
})
$('btn-login').addEventListener('click', () => session.login())
$('btn-logout').addEventListener('click', () => session.logout())
$('btn-disconnect').addEventListener('click', () => session.disconnect())
$('btn-mute').addEventListener('click', () => {
  player.muted = !player.muted
  $('btn-mute').textContent = player.muted ? 'unmute' : 'mute'
})

$('btn-report').addEventListener('click', async () => {
  const server = $<HTMLInputElement>('server').value || '127.0.0.1'
  const port = Number($<HTMLInputElement>('port').value || '8765')
  const chair = Number($<HTMLInputElement>('chair').value || '1')
  const day = $<HTMLInputElement>('report-day').value
  if (!day) {
    report('pick a day for the report first')
    return
  }
  try {
    const response = await fetch(`http://${server}:${port}/report/ch${chair}?day=${day}`)
    const body = await response.json()
    $('report-view').textContent = JSON.stringify(body, null, 2)
  } catch (err) {
    report(`report fetch failed: ${err}`)
  }
})
