#include "player_assets.hpp"

namespace narvis::player {

const char* const kStyle = R"NV(
*{box-sizing:border-box}
body{margin:0;font-family:system-ui,-apple-system,"Segoe UI",Roboto,sans-serif;color:#222;background:#fafafa}
.nv-deck{display:grid;grid-template-columns:minmax(0,3fr) minmax(16rem,1fr);grid-template-rows:auto 1fr auto;gap:0 1rem;min-height:100vh;padding:1rem}
.nv-deck>header{grid-column:1/3}
.nv-deck>header h1{font-size:1.25rem;margin:0 0 .5rem}
.nv-stage{grid-column:1;grid-row:2;display:flex;align-items:center;justify-content:center;background:#fff;border:1px solid #ddd}
.nv-stage svg.nv-svg{width:100%;height:auto;max-height:80vh}
.nv-panel{grid-column:2;grid-row:2;overflow:auto}
.nv-slide h2{font-size:1.1rem;margin:.25rem 0}
.nv-channels{color:#666;font-size:.9rem;margin:0 0 .5rem}
.nv-steps{list-style:none;padding:0;margin:.5rem 0;display:flex;flex-wrap:wrap;gap:.25rem}
.nv-steps li{font-size:.75rem;padding:.1rem .4rem;border:1px solid #ccc;border-radius:.6rem;color:#888}
.nv-steps li.nv-done{border-color:var(--nv-accent);color:var(--nv-accent)}
.nv-notes{white-space:pre-wrap;margin:.5rem 0}
.nv-question{border-top:1px solid #ddd;padding:.5rem 0}
.nv-question label{display:block;margin:.2rem 0}
.nv-feedback{margin-left:.5rem;font-weight:600}
.nv-nav{grid-column:1/3;grid-row:3;display:flex;gap:1rem;align-items:center;justify-content:center;padding:.75rem}
.nv-nav button{font-size:1rem;padding:.3rem 1rem}
.nv-comment{grid-column:1/3;display:flex;gap:.5rem;justify-content:center}
.nv-comment textarea{width:30rem;max-width:80vw}
g.nv-prim{transition-property:opacity,transform;transition-timing-function:var(--nv-easing);transform-box:fill-box;transform-origin:center}
g.nv-prim>*{transition-property:fill,stroke;transition-timing-function:var(--nv-easing)}
.nv-ann{opacity:0;transition:opacity 300ms var(--nv-easing);pointer-events:none}
.nv-ann.nv-on{opacity:1}
.nv-ann text{font-size:14px}
[hidden]{display:none!important}
)NV";

const char* const kScript = R"NV(
(function () {
  'use strict';
  var M = JSON.parse(document.getElementById('nv-data').textContent);
  var svg = document.querySelector('.nv-stage svg');
  var SVGNS = svg.namespaceURI;
  var each = function (list, fn) { Array.prototype.forEach.call(list, fn); };
  var wrappers = {}, anns = {}, forms = {}, originals = {}, morphed = {};
  function paintOf(id) { return (M.paint && M.paint[id]) || 'fill'; }
  each(svg.querySelectorAll('g.nv-prim'), function (g) {
    var id = g.getAttribute('data-nv-id');
    wrappers[id] = g;
    if (g.firstElementChild) originals[id] = g.firstElementChild.cloneNode(true);
  });
  each(document.querySelectorAll('.nv-ann'), function (a) { anns[a.getAttribute('data-step-id')] = a; });
  each(document.querySelectorAll('form.nv-question'), function (f) { forms[f.getAttribute('data-question-id')] = f; });
  var sections = document.querySelectorAll('section.nv-slide');
  var counter = document.querySelector('.nv-counter');
  var index = 0;

  function ease(t) { return t < 0.5 ? 4 * t * t * t : 1 - Math.pow(-2 * t + 2, 3) / 2; }

  function token() {
    if (M.student) return M.student;
    var m = /[?&]student=([^&#]*)/.exec(location.search);
    if (m) return decodeURIComponent(m[1]);
    try {
      var t = localStorage.getItem('nv-student');
      if (!t) {
        t = 'anon-' + Math.random().toString(36).slice(2, 12);
        localStorage.setItem('nv-student', t);
      }
      return t;
    } catch (e) {
      return 'anon';
    }
  }
  var student = token();

  function send(evt) {
    if (!M.beacon) return;
    evt.deck_id = M.deck_id;
    evt.student_token = student;
    evt.timestamp_ms = Date.now();
    try {
      fetch(M.beacon, {method: 'POST', body: JSON.stringify(evt), keepalive: true,
                       headers: {'Content-Type': 'text/plain;charset=UTF-8'}}).catch(function () {});
    } catch (e) {}
  }

  function copyPresentation(from, to) {
    each(from.attributes, function (a) {
      if (/^(fill|stroke|stroke-width|stroke-opacity|fill-opacity|opacity|transform|class|style|stroke-dasharray|stroke-linecap|stroke-linejoin)$/.test(a.name))
        to.setAttribute(a.name, a.value);
    });
  }

  function finalShape(id, spec) {
    var orig = originals[id], el;
    if (spec.element === orig.tagName) {
      el = orig.cloneNode(true);
    } else {
      el = document.createElementNS(SVGNS, spec.element);
      copyPresentation(orig, el);
    }
    Object.keys(spec.attrs).forEach(function (k) { el.setAttribute(k, spec.attrs[k]); });
    return el;
  }

  function pathFromArgs(kinds, args) {
    var sizes = {M: 2, L: 2, C: 6, Q: 4, A: 7, Z: 0}, out = [], k = 0;
    for (var i = 0; i < kinds.length; i++) {
      var n = sizes[kinds[i]], part = [kinds[i]];
      for (var j = 0; j < n; j++, k++) part.push(kinds[i] === 'A' && (j === 3 || j === 4) ? Math.round(args[k]) : args[k]);
      out.push(part.join(' '));
    }
    return out.join(' ');
  }

  function pointsPath(pts, closed) {
    var out = [];
    for (var i = 0; i < pts.length; i += 2) out.push((i ? 'L' : 'M') + pts[i] + ' ' + pts[i + 1]);
    return out.join(' ') + (closed ? ' Z' : '');
  }

  function lerp(a, b, t) { return a + (b - a) * t; }
  function lerpArray(a, b, t) { return a.map(function (v, i) { return lerp(v, b[i], t); }); }

  function replaceShape(id, el) {
    var g = wrappers[id];
    if (g.firstElementChild) g.replaceChild(el, g.firstElementChild); else g.appendChild(el);
  }

  function animateMorph(id, m, duration, done) {
    var work;
    if (m.mode === 'points') {
      work = document.createElementNS(SVGNS, 'path');
      copyPresentation(originals[id], work);
      replaceShape(id, work);
    } else {
      work = wrappers[id].firstElementChild;
    }
    var start = null;
    function frame(now) {
      if (start === null) start = now;
      var t = Math.min(1, (now - start) / Math.max(1, duration)), e = ease(t);
      if (m.mode === 'attrs') Object.keys(m.from).forEach(function (k) { work.setAttribute(k, lerp(m.from[k], m.to[k], e)); });
      else if (m.mode === 'path') work.setAttribute('d', pathFromArgs(m.kinds, lerpArray(m.from, m.to, e)));
      else work.setAttribute('d', pointsPath(lerpArray(m.from, m.to, e), m.closed));
      if (t < 1) requestAnimationFrame(frame); else done();
    }
    requestAnimationFrame(frame);
  }

  function setMorph(id, stepId, animate) {
    var current = morphed[id] || null;
    if (current === stepId || !originals[id]) return;
    morphed[id] = stepId;
    var spec = stepId ? M.effects[stepId].morph[id] : null;
    if (spec && animate) {
      if (current) replaceShape(id, originals[id].cloneNode(true));
      animateMorph(id, spec, M.effects[stepId].duration_ms, function () {
        if (morphed[id] !== stepId) return;
        var el = finalShape(id, spec.final), f = M.states[index].f[id];
        if (f !== undefined) el.style[paintOf(id)] = f;
        replaceShape(id, el);
      });
    } else {
      replaceShape(id, spec ? finalShape(id, spec.final) : originals[id].cloneNode(true));
    }
  }

  function applyStyles(id, g, style) {
    if (style.opacity !== undefined) g.style.opacity = style.opacity;
    if (style.scale !== undefined) g.style.transform = 'scale(' + style.scale + ')';
    if (style.fill !== undefined && g.firstElementChild) g.firstElementChild.style[paintOf(id)] = style.fill;
  }

  function apply(st, effect) {
    var duration = effect ? effect.duration_ms : 0;
    each(document.querySelectorAll('g.nv-prim, g.nv-prim > *'), function (el) {
      el.style.transitionDuration = duration + 'ms';
    });
    M.prims.forEach(function (id, k) {
      var g = wrappers[id];
      if (!g) return;
      g.style.opacity = st.o[k];
      g.style.transform = st.s[id] === undefined ? '' : 'scale(' + st.s[id] + ')';
      setMorph(id, st.m[id] || null, !!effect && effect.effect === 'morph');
      if (g.firstElementChild) g.firstElementChild.style[paintOf(id)] = st.f[id] === undefined ? '' : st.f[id];
    });
    Object.keys(anns).forEach(function (sid) { anns[sid].classList.toggle('nv-on', st.a.indexOf(sid) >= 0); });
    Object.keys(forms).forEach(function (qid) { forms[qid].hidden = st.q.indexOf(qid) < 0; });
    each(sections, function (s, i) {
      s.hidden = i !== st.slide;
      each(s.querySelectorAll('.nv-steps li'), function (li, j) { li.classList.toggle('nv-done', i === st.slide && j < st.step); });
    });
    counter.textContent = (st.slide + 1) + ' / ' + sections.length;
  }

  function render(from, to) {
    var st = M.states[to];
    var slide = M.slides[st.slide];
    var effect = null;
    if (from !== null && to === from + 1 && st.step > 0) effect = M.effects[slide.steps[st.step - 1]] || null;
    if (effect) {
      each(document.querySelectorAll('g.nv-prim, g.nv-prim > *'), function (el) { el.style.transitionDuration = '0ms'; });
      Object.keys(effect.from).forEach(function (id) { if (wrappers[id]) applyStyles(id, wrappers[id], effect.from[id]); });
      svg.getBoundingClientRect();
    }
    apply(st, effect);
    if (from === null || M.states[from].slide !== st.slide) {
      if (from !== null) send({event_type: 'slide_exit', slide_id: M.slides[M.states[from].slide].id});
      send({event_type: 'slide_enter', slide_id: slide.id});
    }
  }

  function go(to) {
    if (to < 0 || to >= M.states.length || to === index) return;
    var from = index;
    index = to;
    render(from, to);
  }

  document.querySelector('.nv-next').addEventListener('click', function () { go(index + 1); });
  document.querySelector('.nv-prev').addEventListener('click', function () { go(index - 1); });
  document.addEventListener('keydown', function (e) {
    if (e.target && /^(INPUT|TEXTAREA)$/.test(e.target.tagName)) return;
    if (e.key === 'ArrowRight' || e.key === 'PageDown' || e.key === ' ') { e.preventDefault(); go(index + 1); }
    if (e.key === 'ArrowLeft' || e.key === 'PageUp') { e.preventDefault(); go(index - 1); }
  });

  Object.keys(forms).forEach(function (qid) {
    var form = forms[qid];
    form.addEventListener('submit', function (e) {
      e.preventDefault();
      var selected = [];
      each(form.querySelectorAll('input:checked'), function (i) { selected.push(parseInt(i.value, 10)); });
      if (!selected.length) return;
      var q = M.questions[qid];
      var right = selected.length === q.correct.length && selected.every(function (v) { return q.correct.indexOf(v) >= 0; });
      form.querySelector('.nv-feedback').textContent = right ? 'Correct' : 'Not quite';
      send({event_type: 'answer', slide_id: M.slides[M.states[index].slide].id, question_id: qid, selected: selected});
    });
  });

  var comment = document.querySelector('form.nv-comment');
  if (comment) comment.addEventListener('submit', function (e) {
    e.preventDefault();
    var box = comment.querySelector('textarea');
    if (!box.value.trim()) return;
    send({event_type: 'comment', slide_id: M.slides[M.states[index].slide].id, text: box.value});
    box.value = '';
    comment.querySelector('button').textContent = 'Sent';
  });

  window.addEventListener('pagehide', function () {
    send({event_type: 'slide_exit', slide_id: M.slides[M.states[index].slide].id});
  });

  render(null, 0);
})();
)NV";

}  // namespace narvis::player
