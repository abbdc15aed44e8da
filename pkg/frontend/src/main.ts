import { TriagebotClient, resolveBaseUrl } from './api.js';
import { mount } from './app.js';

mount(window, new TriagebotClient(resolveBaseUrl()));
